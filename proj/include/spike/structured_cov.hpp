#pragma once

#include "spike/common.hpp"
#include "spike/rng.hpp"

#include <cmath>
#include <string>
#include <variant>
#include <vector>

namespace spike {

enum class Innovation { gaussian, chisq1 };

inline double draw_innovation(Philox& rng, Innovation kind) {
  return kind == Innovation::gaussian ? rng.normal()
                                      : rng.chisq1_standardised();
}

namespace cov {

/// scale * (I + J)/2 on [offset, offset + t): unit variances, equal
/// correlation 1/2, one eigenvalue (t+1)/2 and the rest 1/2 (times scale).
struct Intraclass {
  Eigen::Index offset, t;
  double scale;
};

/// scale * B R B on [offset, offset + t) with R_ij = rho^{|i-j|^{1/3}} and
/// B_rr = sqrt(0.5 + r/(t+1)); long-range but summable correlations. Dense
/// within the block: the Cholesky factor is cached for sampling and matvecs.
struct Omega {
  Eigen::Index offset, t;
  double rho, scale;
  Matrix chol;       // lower triangular, includes scale
  double trace_sq;   // cached sum of squared entries
  Vector powers;     // rho^{d^{1/3}} for d = 0..t-1
};

/// Explicit diagonal on [offset, offset + t).
struct Diagonal {
  Eigen::Index offset;
  Vector d;
};

/// V V' on [offset, offset + t) with V = t x m (mixture mean dispersion).
struct LowRank {
  Eigen::Index offset;
  Matrix v;
};

using Part = std::variant<Intraclass, Omega, Diagonal, LowRank>;

inline Eigen::Index part_offset(const Part& p) {
  return std::visit([](const auto& b) { return b.offset; }, p);
}

inline Eigen::Index part_size(const Part& p) {
  if (const auto* ic = std::get_if<Intraclass>(&p)) return ic->t;
  if (const auto* om = std::get_if<Omega>(&p)) return om->t;
  if (const auto* dg = std::get_if<Diagonal>(&p)) return dg->d.size();
  return std::get<LowRank>(p).v.rows();
}

inline double omega_entry(const Omega& om, Eigen::Index li, Eigen::Index lj) {
  const double t1 = static_cast<double>(om.t + 1);
  const double bi = std::sqrt(0.5 + static_cast<double>(li + 1) / t1);
  const double bj = std::sqrt(0.5 + static_cast<double>(lj + 1) / t1);
  const Eigen::Index d = li < lj ? lj - li : li - lj;
  const double corr = om.powers.size() > d
                          ? om.powers[d]
                          : std::pow(om.rho, std::cbrt(static_cast<double>(d)));
  return om.scale * bi * bj * corr;
}

/// Entry at local indices (within the part's range).
inline double part_entry(const Part& p, Eigen::Index li, Eigen::Index lj) {
  if (const auto* ic = std::get_if<Intraclass>(&p))
    return ic->scale * (li == lj ? 1.0 : 0.5);
  if (const auto* om = std::get_if<Omega>(&p)) return omega_entry(*om, li, lj);
  if (const auto* dg = std::get_if<Diagonal>(&p))
    return li == lj ? dg->d[li] : 0.0;
  const auto& lr = std::get<LowRank>(p);
  return lr.v.row(li).dot(lr.v.row(lj));
}

inline double part_trace(const Part& p) {
  if (const auto* ic = std::get_if<Intraclass>(&p))
    return ic->scale * static_cast<double>(ic->t);
  if (const auto* om = std::get_if<Omega>(&p)) {
    double tr = 0.0;
    for (Eigen::Index l = 0; l < om->t; ++l)
      tr += 0.5 + static_cast<double>(l + 1) / static_cast<double>(om->t + 1);
    return om->scale * tr;
  }
  if (const auto* dg = std::get_if<Diagonal>(&p)) return dg->d.sum();
  return std::get<LowRank>(p).v.squaredNorm();
}

inline void part_apply(const Part& p, const Vector& x, Vector& out) {
  const Eigen::Index o = part_offset(p);
  const Eigen::Index t = part_size(p);
  const auto seg = x.segment(o, t);
  if (const auto* ic = std::get_if<Intraclass>(&p)) {
    out.segment(o, t) += ic->scale * 0.5 * (seg + Vector::Constant(t, seg.sum()));
  } else if (const auto* om = std::get_if<Omega>(&p)) {
    out.segment(o, t) +=
        om->chol.triangularView<Eigen::Lower>() *
        (om->chol.triangularView<Eigen::Lower>().transpose() * seg);
  } else if (const auto* dg = std::get_if<Diagonal>(&p)) {
    out.segment(o, t) += dg->d.cwiseProduct(seg);
  } else {
    const auto& lr = std::get<LowRank>(p);
    out.segment(o, t) += lr.v * (lr.v.transpose() * seg);
  }
}

inline void part_sample(const Part& p, Philox& rng, Innovation kind,
                        Vector& out) {
  const Eigen::Index o = part_offset(p);
  const Eigen::Index t = part_size(p);
  if (const auto* ic = std::get_if<Intraclass>(&p)) {
    const double s = std::sqrt(ic->scale * 0.5);
    Vector z(t);
    for (Eigen::Index l = 0; l < t; ++l) z[l] = draw_innovation(rng, kind);
    const double z0 = draw_innovation(rng, kind);
    out.segment(o, t) += s * (z.array() + z0).matrix();
  } else if (const auto* om = std::get_if<Omega>(&p)) {
    Vector z(t);
    for (Eigen::Index l = 0; l < t; ++l) z[l] = draw_innovation(rng, kind);
    out.segment(o, t) += om->chol.triangularView<Eigen::Lower>() * z;
  } else if (const auto* dg = std::get_if<Diagonal>(&p)) {
    for (Eigen::Index l = 0; l < t; ++l)
      out[o + l] += std::sqrt(dg->d[l]) * draw_innovation(rng, kind);
  } else {
    const auto& lr = std::get<LowRank>(p);
    Vector z(lr.v.cols());
    for (Eigen::Index l = 0; l < z.size(); ++l)
      z[l] = draw_innovation(rng, kind);
    out.segment(o, t) += lr.v * z;
  }
}

}  // namespace cov

/// Block-structured covariance: a sum of parts, each living on a contiguous
/// index range. Parts may overlay each other (low-rank mean dispersion on
/// top of a full-range block); entries, traces and matvecs sum over parts,
/// so nothing p x p is ever assembled for the block-diagonal scenarios.
class StructuredCov {
 public:
  StructuredCov() = default;
  StructuredCov(Eigen::Index p, std::vector<cov::Part> parts)
      : p_(p), parts_(std::move(parts)) {
    for (const auto& part : parts_)
      require(cov::part_offset(part) >= 0 &&
                  cov::part_offset(part) + cov::part_size(part) <= p_,
              "covariance part exceeds the dimension");
  }

  Eigen::Index dim() const { return p_; }
  const std::vector<cov::Part>& parts() const { return parts_; }

  double trace() const {
    double tr = 0.0;
    for (const auto& part : parts_) tr += cov::part_trace(part);
    return tr;
  }

  double entry(Eigen::Index i, Eigen::Index j) const {
    double e = 0.0;
    for (const auto& part : parts_) {
      const Eigen::Index o = cov::part_offset(part);
      const Eigen::Index t = cov::part_size(part);
      if (i >= o && i < o + t && j >= o && j < o + t)
        e += cov::part_entry(part, i - o, j - o);
    }
    return e;
  }

  Vector apply(const Vector& x) const {
    require(x.size() == p_, "matvec dimension mismatch");
    Vector out = Vector::Zero(p_);
    for (const auto& part : parts_) cov::part_apply(part, x, out);
    return out;
  }

  double quad(const Vector& x) const { return x.dot(apply(x)); }

  /// One mean-zero draw added into out (which must be a zero p-vector or an
  /// already-placed mean). Innovations are consumed part by part in order.
  void add_sample(Philox& rng, Innovation kind, Vector& out) const {
    for (const auto& part : parts_) cov::part_sample(part, rng, kind, out);
  }

  Matrix dense() const {
    require(p_ <= 8192, "dense materialisation is for small dimensions only");
    Matrix m = Matrix::Zero(p_, p_);
    for (const auto& part : parts_) {
      const Eigen::Index o = cov::part_offset(part);
      const Eigen::Index t = cov::part_size(part);
      for (Eigen::Index i = 0; i < t; ++i)
        for (Eigen::Index j = 0; j < t; ++j)
          m(o + i, o + j) += cov::part_entry(part, i, j);
    }
    return m;
  }

 private:
  Eigen::Index p_ = 0;
  std::vector<cov::Part> parts_;
};

/// tr(A B) for two structured covariances of the same dimension, via
/// entrywise sums over overlapping part ranges. Diagonal parts reduce the
/// double loop to the diagonal.
inline double cross_trace(const StructuredCov& a, const StructuredCov& b) {
  require(a.dim() == b.dim(), "trace product dimension mismatch");
  double total = 0.0;
  for (const auto& pa : a.parts()) {
    const Eigen::Index oa = cov::part_offset(pa);
    const Eigen::Index ta = cov::part_size(pa);
    for (const auto& pb : b.parts()) {
      const Eigen::Index ob = cov::part_offset(pb);
      const Eigen::Index tb = cov::part_size(pb);
      const Eigen::Index lo = std::max(oa, ob);
      const Eigen::Index hi = std::min(oa + ta, ob + tb);
      if (lo >= hi) continue;
      const bool diag_a = std::holds_alternative<cov::Diagonal>(pa);
      const bool diag_b = std::holds_alternative<cov::Diagonal>(pb);
      if (&pa == &pb) {  // self pair: closed forms
        if (const auto* om = std::get_if<cov::Omega>(&pa)) {
          total += om->trace_sq;
          continue;
        }
        if (const auto* ic = std::get_if<cov::Intraclass>(&pa)) {
          const double t = static_cast<double>(ic->t);
          total += ic->scale * ic->scale * t * (t + 3.0) / 4.0;
          continue;
        }
      }
      if (diag_a || diag_b) {
        for (Eigen::Index i = lo; i < hi; ++i)
          total += cov::part_entry(pa, i - oa, i - oa) *
                   cov::part_entry(pb, i - ob, i - ob);
      } else {
        for (Eigen::Index i = lo; i < hi; ++i)
          for (Eigen::Index j = lo; j < hi; ++j)
            total += cov::part_entry(pa, i - oa, j - oa) *
                     cov::part_entry(pb, i - ob, j - ob);
      }
    }
  }
  return total;
}

inline double trace_sq(const StructuredCov& a) { return cross_trace(a, a); }

/// Intraclass correlation block (I + J)/2, optionally scaled.
inline StructuredCov build_intraclass(Eigen::Index t, double scale = 1.0) {
  require(t >= 1, "intraclass block needs t >= 1");
  require(scale > 0.0, "intraclass scale must be positive");
  return StructuredCov(t, {cov::Intraclass{0, t, scale}});
}

namespace cov {

inline Omega make_omega_part(Eigen::Index offset, Eigen::Index t, double rho,
                             double scale) {
  Omega om{offset, t, rho, scale, Matrix(), 0.0, Vector(t)};
  for (Eigen::Index d = 0; d < t; ++d)
    om.powers[d] = std::pow(rho, std::cbrt(static_cast<double>(d)));
  Matrix dense(t, t);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < t; ++j) dense(i, j) = omega_entry(om, i, j);
  om.trace_sq = dense.squaredNorm();
  Eigen::LLT<Matrix> llt(dense);
  if (llt.info() != Eigen::Success)
    throw NumericError("long-range block of size " + std::to_string(t) +
                       " (rho=" + std::to_string(rho) +
                       ") is not numerically positive definite");
  om.chol = llt.matrixL();
  return om;
}

}  // namespace cov

/// Long-range correlated block B (rho^{|i-j|^{1/3}}) B, optionally scaled.
inline StructuredCov build_omega(Eigen::Index t, double rho,
                                 double scale = 1.0) {
  require(t >= 1, "long-range block needs t >= 1");
  require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
  require(scale > 0.0, "scale must be positive");
  return StructuredCov(t, {cov::make_omega_part(0, t, rho, scale)});
}

/// Leading k eigenpairs of a structured covariance via deterministic block
/// power iteration with Rayleigh-Ritz extraction.
inline void top_eigenpairs(const StructuredCov& cov, int k, Matrix& vecs,
                           Vector& vals, int max_iter = 500) {
  const Eigen::Index p = cov.dim();
  const Eigen::Index m = std::min<Eigen::Index>(p, k + 2);
  require(k >= 1 && k <= p, "eigenpair count out of range");

  Philox rng(0x5eed5eedULL, 0);
  Matrix q(p, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < p; ++i) q(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(q);
  q = qr.householderQ() * Matrix::Identity(p, m);

  for (int it = 0; it < max_iter; ++it) {
    Matrix z(p, m);
    for (Eigen::Index j = 0; j < m; ++j) z.col(j) = cov.apply(q.col(j));
    Eigen::HouseholderQR<Matrix> step(z);
    q = step.householderQ() * Matrix::Identity(p, m);

    Matrix zz(p, m);
    for (Eigen::Index j = 0; j < m; ++j) zz.col(j) = cov.apply(q.col(j));
    const Matrix small = q.transpose() * zz;
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        ((small + small.transpose()) * 0.5).eval());

    // Ritz values settle long before the vectors do, so convergence is
    // judged on the pair residuals themselves.
    double worst = 0.0;
    vals.resize(k);
    vecs.resize(p, k);
    for (int r = 0; r < k; ++r) {
      const Vector w = es.eigenvectors().col(m - 1 - r);
      vals[r] = es.eigenvalues()(m - 1 - r);
      vecs.col(r) = q * w;
      const double resid = (zz * w - vals[r] * vecs.col(r)).norm() /
                           std::max(1.0, std::abs(vals[r]));
      worst = std::max(worst, resid);
    }
    if (worst <= 1e-10 || it == max_iter - 1) return;
  }
}

}  // namespace spike
