#include "biorth/algebra.hpp"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

namespace biorth {

namespace {

using cd = std::complex<double>;

// --- Gell-Mann data file ----------------------------------------------------

std::array<Eigen::Matrix3cd, 8> parse_gellmann_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Gell-Mann data file: " + path);

  std::array<Eigen::Matrix3cd, 8> out;
  std::array<bool, 8> seen{};
  std::string line;
  int current = -1, row = 0;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "lambda") {
      int k = 0;
      if (!(ls >> k) || k < 1 || k > 8)
        throw ConfigError("gellmann.dat: bad lambda header");
      current = k - 1;
      row = 0;
      continue;
    }
    if (current < 0 || row > 2) throw ConfigError("gellmann.dat: row outside a lambda block");
    // First token was already consumed; re-parse the full line.
    std::istringstream rs(line);
    for (int col = 0; col < 3; ++col) {
      long rn, rd, rs3, in_, id, is3;
      if (!(rs >> rn >> rd >> rs3 >> in_ >> id >> is3))
        throw ConfigError("gellmann.dat: malformed entry");
      const double s3 = std::sqrt(3.0);
      const double re = double(rn) / double(rd) / (rs3 ? s3 : 1.0);
      const double im = double(in_) / double(id) / (is3 ? s3 : 1.0);
      out[current](row, col) = cd(re, im);
    }
    if (++row == 3) {
      seen[current] = true;
      current = -1;
    }
  }
  for (int k = 0; k < 8; ++k)
    if (!seen[k]) throw ConfigError("gellmann.dat: missing lambda block");
  return out;
}

const std::array<Eigen::Matrix3cd, 8>& gellmann_all() {
  static const std::array<Eigen::Matrix3cd, 8> m = parse_gellmann_file(gellmann_path());
  return m;
}

// --- dense bracket routes ----------------------------------------------------

std::vector<Quat> basis_quats(Alg tag, int k) {
  // Basis vector k as a tuple of pure-imaginary quaternions.
  const int nf = tag == Alg::sp1 ? 1 : tag == Alg::sp1_plus_sp1 ? 2 : 4;
  std::vector<Quat> f(nf, Quat{});
  f[k / 3] = (k % 3 == 0) ? Quat::i() : (k % 3 == 1) ? Quat::j() : Quat::k();
  return f;
}

StructureTable build_table(Alg tag) {
  const int n = alg_dim(tag);
  StructureTable t{tag, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n))};
  if (tag == Alg::su3) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Eigen::Matrix3cd a = su3_matrix(AlgVec::basis(tag, i));
        const Eigen::Matrix3cd b = su3_matrix(AlgVec::basis(tag, j));
        const AlgVec br = su3_from_matrix(a * b - b * a);
        for (int k = 0; k < n; ++k) t.c[i](j, k) = br.c[k];
      }
    return t;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto fa = basis_quats(tag, i);
      const auto fb = basis_quats(tag, j);
      std::vector<Quat> br(fa.size());
      for (size_t f = 0; f < fa.size(); ++f) br[f] = fa[f] * fb[f] - fb[f] * fa[f];
      const AlgVec v = alg_from_quats(tag, br);
      for (int k = 0; k < n; ++k) t.c[i](j, k) = v.c[k];
    }
  return t;
}

}  // namespace

std::string gellmann_path() {
  if (const char* env = std::getenv("BIORTH_DATA_DIR"))
    return std::string(env) + "/gellmann.dat";
#ifdef BIORTH_SOURCE_DATA_DIR
  return std::string(BIORTH_SOURCE_DATA_DIR) + "/gellmann.dat";
#else
  return "data/gellmann.dat";
#endif
}

const Eigen::Matrix3cd& gellmann(int k) {
  if (k < 1 || k > 8) throw DomainError("gellmann: index out of range");
  return gellmann_all()[k - 1];
}

Eigen::Matrix3cd su3_matrix(const AlgVec& x) {
  if (x.tag != Alg::su3) throw TagMismatchError("su3_matrix: su3 input required");
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  for (int k = 0; k < 8; ++k) m += cd(0, -x.c[k]) * gellmann_all()[k];
  return m;
}

AlgVec su3_from_matrix(const Eigen::Matrix3cd& m) {
  // coeff_k = <m, -i lambda_k> with <A,B> = -Re Tr(AB)/2.
  Eigen::VectorXd c(8);
  for (int k = 0; k < 8; ++k) {
    const Eigen::Matrix3cd ek = cd(0, -1) * gellmann_all()[k];
    c[k] = -0.5 * (m * ek).trace().real();
  }
  return {Alg::su3, c};
}

std::vector<Quat> quat_factors(const AlgVec& x) {
  if (x.tag == Alg::su3) throw TagMismatchError("quat_factors: quaternionic algebra required");
  const int nf = x.tag == Alg::sp1 ? 1 : x.tag == Alg::sp1_plus_sp1 ? 2 : 4;
  std::vector<Quat> f(nf);
  for (int i = 0; i < nf; ++i)
    f[i] = Quat{0, x.c[3 * i + 0], x.c[3 * i + 1], x.c[3 * i + 2]};
  return f;
}

AlgVec alg_from_quats(Alg tag, const std::vector<Quat>& f) {
  const int nf = tag == Alg::sp1 ? 1 : tag == Alg::sp1_plus_sp1 ? 2 : 4;
  if (int(f.size()) != nf) throw TagMismatchError("alg_from_quats: factor count mismatch");
  Eigen::VectorXd c(alg_dim(tag));
  for (int i = 0; i < nf; ++i) {
    c[3 * i + 0] = f[i].x;
    c[3 * i + 1] = f[i].y;
    c[3 * i + 2] = f[i].z;
  }
  return {tag, c};
}

double StructureTable::jacobi_residual() const {
  const int n = alg_dim(tag);
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        // [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j] = 0, per component.
        for (int m = 0; m < n; ++m) {
          double s = 0;
          for (int l = 0; l < n; ++l)
            s += c[i](j, l) * c[l](k, m) + c[j](k, l) * c[l](i, m) + c[k](i, l) * c[l](j, m);
          worst = std::max(worst, std::abs(s));
        }
      }
  return worst;
}

double StructureTable::antisymmetry_residual() const {
  const int n = alg_dim(tag);
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        worst = std::max(worst, std::abs(c[i](j, k) + c[j](i, k)));
  return worst;
}

const StructureTable& structure_table(Alg tag) {
  static std::mutex mu;
  static StructureTable tables[4];
  static bool built[4] = {false, false, false, false};
  const int idx = int(tag);
  std::scoped_lock lock(mu);
  if (!built[idx]) {
    tables[idx] = build_table(tag);
    built[idx] = true;
  }
  return tables[idx];
}

void MetricEndo::validate(double tol) const {
  if (m.rows() != alg_dim(tag) || m.cols() != alg_dim(tag))
    throw ConfigError("MetricEndo: wrong matrix size");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol)
    throw ConfigError("MetricEndo: not g0-symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() <= 0)
    throw ConfigError("MetricEndo: not positive definite");
}

MetricEndo wilking_phi() {
  const int n = 6;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  // P projects onto the diagonal {(X,X)}: P(X,Y) = ((X+Y)/2, (X+Y)/2).
  for (int a = 0; a < 3; ++a) {
    p(a, a) = p(a + 3, a + 3) = 0.5;
    p(a, a + 3) = p(a + 3, a) = 0.5;
  }
  return {Alg::sp1_plus_sp1, Eigen::MatrixXd::Identity(n, n) - 0.5 * p};
}

MetricEndo direct_sum_phi(const MetricEndo& phi) {
  if (phi.tag != Alg::sp1_plus_sp1)
    throw TagMismatchError("direct_sum_phi: sp1_plus_sp1 input required");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(12, 12);
  m.block<6, 6>(0, 0) = phi.m;
  m.block<6, 6>(6, 6) = phi.m;
  return {Alg::double_sp1_plus_sp1, m};
}

double GroupElem::invariant_residual() const {
  double r = 0;
  if (quat_count() > 0) {
    for (int i = 0; i < quat_count(); ++i) r = std::max(r, std::abs(q[i].norm() - 1.0));
    return r;
  }
  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  r = (u.adjoint() * u - id).cwiseAbs().maxCoeff();
  r = std::max(r, std::abs(u.determinant() - cd(1, 0)));
  if (tag == Group::SO3_in_SU3) r = std::max(r, u.imag().cwiseAbs().maxCoeff());
  return r;
}

void GroupElem::validate(double tol) const {
  if (invariant_residual() > tol)
    throw DomainError(std::string("GroupElem: invariant violation for ") + group_name(tag));
}

GroupElem group_mul(const GroupElem& a, const GroupElem& b) {
  if (a.tag != b.tag) throw TagMismatchError("group_mul: tags differ");
  GroupElem r = a;
  if (a.quat_count() > 0)
    for (int i = 0; i < a.quat_count(); ++i) r.q[i] = a.q[i] * b.q[i];
  else
    r.u = a.u * b.u;
  return r;
}

GroupElem group_inverse(const GroupElem& a) {
  GroupElem r = a;
  if (a.quat_count() > 0)
    for (int i = 0; i < a.quat_count(); ++i) r.q[i] = a.q[i].conj() * (1.0 / a.q[i].norm2());
  else
    r.u = a.u.adjoint();
  return r;
}

double inner_g0(const AlgVec& x, const AlgVec& y) {
  require_same_tag(x, y, "inner_g0");
  return x.c.dot(y.c);
}

double inner_gphi(const AlgVec& x, const AlgVec& y, const MetricEndo& phi) {
  require_same_tag(x, y, "inner_gphi");
  if (phi.tag != x.tag) throw TagMismatchError("inner_gphi: endomorphism tag differs");
  return (phi.m * x.c).dot(y.c);
}

AlgVec bracket(const AlgVec& x, const AlgVec& y) {
  require_same_tag(x, y, "bracket");
  const StructureTable& t = structure_table(x.tag);
  const int n = alg_dim(x.tag);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (x.c[i] == 0.0) continue;
    out += x.c[i] * (t.c[i].transpose() * y.c);
  }
  return {x.tag, out};
}

AlgVec proj_diagonal(const AlgVec& x) {
  if (x.tag != Alg::sp1_plus_sp1)
    throw TagMismatchError("proj_diagonal: sp1_plus_sp1 input required");
  Eigen::VectorXd c(6);
  for (int a = 0; a < 3; ++a) {
    const double m = 0.5 * (x.c[a] + x.c[a + 3]);
    c[a] = c[a + 3] = m;
  }
  return {x.tag, c};
}

namespace {

bool compatible(Group g, Alg a) {
  switch (g) {
    case Group::Sp1xSp1: return a == Alg::sp1_plus_sp1;
    case Group::DoubleSp1xSp1: return a == Alg::double_sp1_plus_sp1;
    case Group::SU3:
    case Group::SO3_in_SU3: return a == Alg::su3;
  }
  return false;
}

}  // namespace

AlgVec adjoint(const GroupElem& u, const AlgVec& x) {
  if (!compatible(u.tag, x.tag)) throw TagMismatchError("adjoint: incompatible group/algebra tags");
  if (u.quat_count() > 0) {
    auto f = quat_factors(x);
    for (int i = 0; i < int(f.size()); ++i) f[i] = u.q[i] * f[i] * u.q[i].conj();
    return alg_from_quats(x.tag, f);
  }
  return su3_from_matrix(u.u * su3_matrix(x) * u.u.adjoint());
}

Eigen::MatrixXd adjoint_matrix(const GroupElem& u, Alg tag) {
  const int n = alg_dim(tag);
  Eigen::MatrixXd m(n, n);
  for (int k = 0; k < n; ++k) m.col(k) = adjoint(u, AlgVec::basis(tag, k)).c;
  return m;
}

GroupElem exp_elem(const AlgVec& x, double t) {
  if (x.tag == Alg::su3) {
    // exp(tX) with X anti-Hermitian: diagonalize the Hermitian iX.
    const Eigen::Matrix3cd h = cd(0, 1) * su3_matrix(x);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h);
    Eigen::Vector3cd ph;
    for (int i = 0; i < 3; ++i) ph[i] = std::exp(cd(0, -t * es.eigenvalues()[i]));
    GroupElem g = GroupElem::identity(Group::SU3);
    g.u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    return g;
  }
  const Group gt = x.tag == Alg::sp1_plus_sp1 ? Group::Sp1xSp1 : Group::DoubleSp1xSp1;
  if (x.tag == Alg::sp1)
    throw TagMismatchError("exp_elem: bare sp1 has no group tag; embed into sp1_plus_sp1");
  GroupElem g = GroupElem::identity(gt);
  const auto f = quat_factors(x);
  for (int i = 0; i < int(f.size()); ++i) g.q[i] = quat_exp_pure(f[i] * t);
  return g;
}

namespace {

// Closed form on one sp(1) factor: ad_X V = 2 X x V rotates the plane
// perpendicular to X at rate 2|X|, so (1 - e^{-ad_X})/ad_X splits into the
// parallel part plus sin/cos coefficients on the perpendicular plane.
Eigen::Vector3d dexp_left_sp1(const Eigen::Vector3d& x, const Eigen::Vector3d& v) {
  const double th = x.norm();
  if (th < 1e-7) {
    const Eigen::Vector3d xv = x.cross(v);
    return v - xv + (2.0 / 3.0) * x.cross(xv);
  }
  const Eigen::Vector3d n = x / th;
  const double alpha = 2 * th;
  const Eigen::Vector3d vpar = n.dot(v) * n;
  const Eigen::Vector3d vperp = v - vpar;
  return vpar + (std::sin(alpha) / alpha) * vperp +
         ((std::cos(alpha) - 1) / alpha) * n.cross(v);
}

}  // namespace

AlgVec dexp_left(const AlgVec& x, const AlgVec& v) {
  require_same_tag(x, v, "dexp_left");
  if (x.tag != Alg::su3) {
    const int nf = x.tag == Alg::sp1 ? 1 : x.tag == Alg::sp1_plus_sp1 ? 2 : 4;
    Eigen::VectorXd out(alg_dim(x.tag));
    for (int i = 0; i < nf; ++i)
      out.segment<3>(3 * i) = dexp_left_sp1(x.c.segment<3>(3 * i), v.c.segment<3>(3 * i));
    return {x.tag, out};
  }
  // su(3): series sum_k (-ad_X)^k V / (k+1)!; fast within the chart radii in use.
  Eigen::VectorXd term = v.c, acc = v.c;
  const StructureTable& t = structure_table(x.tag);
  const int n = alg_dim(x.tag);
  Eigen::MatrixXd ad(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j)
      if (x.c[j] != 0.0) col += x.c[j] * t.c[j].row(i).transpose();
    ad.col(i) = col;  // ad(e_i-th input): [X, e_i]
  }
  for (int k = 1; k < 60; ++k) {
    term = (-1.0 / (k + 1)) * (ad * term);
    acc += term;
    if (term.norm() < 1e-18 * (1.0 + acc.norm())) break;
  }
  return {x.tag, acc};
}

std::pair<AlgVec, AlgVec> cartan_split(const AlgVec& x) {
  if (x.tag != Alg::su3) throw TagMismatchError("cartan_split: su3 input required");
  AlgVec vert = AlgVec::zero(Alg::su3), hor = AlgVec::zero(Alg::su3);
  for (int k : so3_indices()) vert.c[k] = x.c[k];
  for (int k : so3_perp_indices()) hor.c[k] = x.c[k];
  return {vert, hor};
}

const std::array<int, 3>& so3_indices() {
  static const std::array<int, 3> idx{1, 4, 6};  // lambda_2, lambda_5, lambda_7
  return idx;
}

const std::array<int, 5>& so3_perp_indices() {
  static const std::array<int, 5> idx{0, 2, 3, 5, 7};  // lambda_1,3,4,6,8
  return idx;
}

GroupElem euler_rotation(double x, double y, double z) {
  // Closed-form one-parameter blocks of exp(-i lambda_2 t) and exp(-i lambda_5 t).
  auto rot2 = [](double t) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    r(0, 0) = std::cos(t);
    r(0, 1) = -std::sin(t);
    r(1, 0) = std::sin(t);
    r(1, 1) = std::cos(t);
    return r;
  };
  auto rot5 = [](double t) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    r(0, 0) = std::cos(t);
    r(0, 2) = -std::sin(t);
    r(2, 0) = std::sin(t);
    r(2, 2) = std::cos(t);
    return r;
  };
  GroupElem g = GroupElem::identity(Group::SO3_in_SU3);
  g.u = (rot2(x) * rot5(y) * rot2(z)).cast<cd>();
  return g;
}

}  // namespace biorth
