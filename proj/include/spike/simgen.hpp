#pragma once

#include "spike/common.hpp"
#include "spike/rng.hpp"
#include "spike/structured_cov.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace spike {

/// Population description of a two-class simulation setting: means, block
/// covariances, the true spike structure and the squared mean gaps before
/// and after spike removal.
struct PopulationTruth {
  Eigen::Index p = 0;
  Eigen::Index n1 = 0, n2 = 0;
  Vector mu1, mu2;
  StructuredCov sigma1, sigma2;
  int k1 = 0, k2 = 0;
  Matrix h1, h2;  // p x k_i leading population eigenvectors
  Vector lam1, lam2;
  double delta = 0.0;    // ||mu1 - mu2||^2
  double delta_a = 0.0;  // ||A1 mu1 - A2 mu2||^2
};

/// How observations of one class are generated.
struct MixtureSpec {
  std::vector<Vector> means;  // component means of the latent draw
  Vector mean_shift;          // subtracted average of the component means
};

struct ClassGenerator {
  Vector mu;
  StructuredCov noise;         // block covariance driving the latent draw
  Innovation innovation = Innovation::gaussian;
  std::optional<MixtureSpec> mixture;
};

struct ScenarioSpec {
  std::string id;
  Eigen::Index p = 0;
  Eigen::Index n1 = 0, n2 = 0;
  ClassGenerator gen1, gen2;
};

struct Scenario {
  ScenarioSpec spec;
  PopulationTruth truth;
};

/// One observation of class i appended into out (resized to p).
inline void draw_observation(const ClassGenerator& gen, Philox& rng,
                             Vector& out) {
  out = gen.mu;
  if (gen.mixture) {
    const auto& mix = *gen.mixture;
    const std::uint32_t l =
        rng.below(static_cast<std::uint32_t>(mix.means.size()));
    out += mix.means[l] - mix.mean_shift;
  }
  gen.noise.add_sample(rng, gen.innovation, out);
}

inline Vector draw_observation(const ClassGenerator& gen, Philox& rng) {
  Vector out;
  draw_observation(gen, rng, out);
  return out;
}

inline Matrix draw_sample(const ClassGenerator& gen, Philox& rng,
                          Eigen::Index n) {
  Matrix x(gen.mu.size(), n);
  Vector col;
  for (Eigen::Index j = 0; j < n; ++j) {
    draw_observation(gen, rng, col);
    x.col(j) = col;
  }
  return x;
}

namespace detail {

inline Eigen::Index ceil_pow(double base, double expo) {
  return static_cast<Eigen::Index>(std::ceil(std::pow(base, expo) - 1e-9));
}

/// Shared mean gap of the block scenarios: the trailing 2*ceil(p^{3/5}/2)
/// coordinates of mu2 are +1 then -1 in equal halves.
inline Vector block_scenario_mu2(Eigen::Index p) {
  const Eigen::Index half = static_cast<Eigen::Index>(
      std::ceil(std::pow(static_cast<double>(p), 0.6) / 2.0 - 1e-9));
  require(2 * half <= p, "dimension too small for the mean structure");
  Vector mu2 = Vector::Zero(p);
  mu2.segment(p - 2 * half, half).setOnes();
  mu2.tail(half).setConstant(-1.0);
  return mu2;
}

/// Two intraclass blocks followed by a scaled long-range block.
inline StructuredCov two_spike_blocks(Eigen::Index p, Eigen::Index t1,
                                      Eigen::Index t2, double c,
                                      double rho = 0.3) {
  require(t1 + t2 < p, "dimension too small for the block structure");
  return StructuredCov(
      p, {cov::Intraclass{0, t1, 1.0}, cov::Intraclass{t1, t2, 1.0},
          cov::make_omega_part(t1 + t2, p - t1 - t2, rho, c)});
}

inline Matrix block_eigvecs(Eigen::Index p, Eigen::Index t1, Eigen::Index t2) {
  Matrix h = Matrix::Zero(p, 2);
  h.col(0).head(t1).setConstant(1.0 / std::sqrt(static_cast<double>(t1)));
  h.col(1).segment(t1, t2).setConstant(1.0 /
                                       std::sqrt(static_cast<double>(t2)));
  return h;
}

inline void fill_delta_a(PopulationTruth& t) {
  Vector mu_a = t.mu1 - t.h1 * (t.h1.transpose() * t.mu1);
  mu_a -= t.mu2 - t.h2 * (t.h2.transpose() * t.mu2);
  t.delta_a = mu_a.squaredNorm();
  t.delta = (t.mu1 - t.mu2).squaredNorm();
}

}  // namespace detail

/// Builds one of the five standard scenarios at dimension p. Sample sizes,
/// means, covariance blocks and the true spike structure follow the
/// scenario family; p must be large enough for the blocks to fit.
inline Scenario make_scenario(const std::string& id, Eigen::Index p) {
  require(p >= 32, "scenarios are defined for p >= 32");
  const double pd = static_cast<double>(p);
  Scenario sc;
  sc.spec.id = id;
  sc.spec.p = p;
  PopulationTruth& t = sc.truth;
  t.p = p;
  t.k1 = t.k2 = 2;

  if (id == "s1") {
    sc.spec.n1 = detail::ceil_pow(pd, 0.4);
    sc.spec.n2 = 2 * sc.spec.n1;
    const double lam1 = std::pow(pd, 2.0 / 3.0);
    const double lam2 = std::sqrt(pd);
    Vector d(p);
    d.setOnes();
    d[0] = lam1;
    d[1] = lam2;
    const Eigen::Index ones = detail::ceil_pow(pd, 0.5);
    t.mu1 = Vector::Zero(p);
    t.mu2 = Vector::Zero(p);
    t.mu2.tail(ones).setOnes();
    t.sigma1 = StructuredCov(p, {cov::Diagonal{0, d}});
    t.sigma2 = StructuredCov(p, {cov::Diagonal{0, 2.0 * d}});
    t.h1 = Matrix::Identity(p, 2);
    t.h2 = t.h1;
    t.lam1 = Vector{{lam1, lam2}};
    t.lam2 = 2.0 * t.lam1;
  } else if (id == "s2" || id == "s3") {
    sc.spec.n1 = detail::ceil_pow(pd, 0.5);
    sc.spec.n2 = 2 * sc.spec.n1;
    const Eigen::Index b1 = id == "s2" ? detail::ceil_pow(pd, 2.0 / 3.0)
                                       : (p + 2) / 3;
    const Eigen::Index b2 = id == "s2" ? detail::ceil_pow(pd, 0.5)
                                       : (p + 8) / 9;
    t.mu1 = Vector::Zero(p);
    t.mu2 = detail::block_scenario_mu2(p);
    t.sigma1 = detail::two_spike_blocks(p, b1, b2, 1.0);
    t.sigma2 = detail::two_spike_blocks(p, 2 * b1, 2 * b2, 1.3);
    t.h1 = detail::block_eigvecs(p, b1, b2);
    t.h2 = detail::block_eigvecs(p, 2 * b1, 2 * b2);
    t.lam1 = Vector{{(static_cast<double>(b1) + 1.0) / 2.0,
                     (static_cast<double>(b2) + 1.0) / 2.0}};
    t.lam2 = Vector{{static_cast<double>(b1) + 0.5,
                     static_cast<double>(b2) + 0.5}};
    if (id == "s3") {
      sc.spec.gen1.innovation = Innovation::chisq1;
      sc.spec.gen2.innovation = Innovation::chisq1;
    }
  } else if (id == "s4" || id == "s5") {
    sc.spec.n1 = detail::ceil_pow(pd, id == "s4" ? 0.4 : 0.6);
    sc.spec.n2 = 2 * sc.spec.n1;
    t.mu1 = Vector::Zero(p);
    t.mu2 = detail::block_scenario_mu2(p);
    const Eigen::Index q11 = detail::ceil_pow(pd, 2.0 / 3.0);
    const Eigen::Index q12 = 2 * detail::ceil_pow(pd, 0.5);
    const Eigen::Index q21 = 2 * detail::ceil_pow(pd, 2.0 / 3.0);
    const Eigen::Index q22 = detail::ceil_pow(pd, 0.5);
    require(std::max(q11 + q12, q21 + q22) <= p,
            "dimension too small for the mixture structure");

    auto mixture_class = [p](Eigen::Index qa, Eigen::Index qb, double rho,
                             ClassGenerator& gen, StructuredCov& sigma) {
      Vector ma = Vector::Zero(p), mb = Vector::Zero(p);
      ma.head(qa).setConstant(std::sqrt(3.0));
      mb.segment(qa, qb).setConstant(std::sqrt(3.0));
      MixtureSpec mix;
      mix.means = {ma, mb, Vector::Zero(p)};
      mix.mean_shift = (ma + mb) / 3.0;
      gen.mixture = mix;
      gen.noise = build_omega(p, rho);
      // Sigma = mean dispersion + the latent block: V V' with columns
      // (m_l - m_l')/3 over the three pairs.
      Matrix v(p, 3);
      v.col(0) = (ma - mb) / 3.0;
      v.col(1) = ma / 3.0;
      v.col(2) = mb / 3.0;
      std::vector<cov::Part> parts = gen.noise.parts();
      parts.push_back(cov::LowRank{0, v.topRows(qa + qb)});
      sigma = StructuredCov(p, std::move(parts));
    };
    mixture_class(q11, q12, 0.3, sc.spec.gen1, t.sigma1);
    mixture_class(q21, q22, 0.5, sc.spec.gen2, t.sigma2);
    top_eigenpairs(t.sigma1, 2, t.h1, t.lam1);
    top_eigenpairs(t.sigma2, 2, t.h2, t.lam2);
  } else {
    throw ConfigError("unknown scenario '" + id + "'");
  }

  require(sc.spec.n1 >= 4, "dimension gives fewer than 4 training samples");
  sc.spec.gen1.mu = t.mu1;
  sc.spec.gen2.mu = t.mu2;
  if (id != "s4" && id != "s5") {
    sc.spec.gen1.noise = t.sigma1;
    sc.spec.gen2.noise = t.sigma2;
  }
  t.n1 = sc.spec.n1;
  t.n2 = sc.spec.n2;
  detail::fill_delta_a(t);
  return sc;
}

/// Population standard deviations of the distance-based score before and
/// after spike removal, for test points from either class.
struct OracleDeltas {
  double delta = 0.0;    // squared mean gap
  double delta_a = 0.0;  // squared mean gap after spike removal
  double d_o[2] = {0, 0};    // delta_{0i}
  double d[2] = {0, 0};      // delta_i
  double d_oa[2] = {0, 0};   // delta_{0i} after spike removal
  double d_a[2] = {0, 0};    // delta_i after spike removal
};

namespace detail {

/// Operator beta I + U G U' on the shared low-rank basis U.
struct BasisOp {
  double beta;
  Matrix g;
};

inline BasisOp op_mul(const BasisOp& a, const BasisOp& b) {
  return BasisOp{a.beta * b.beta,
                 a.beta * b.g + b.beta * a.g + a.g * b.g};
}

struct BasisEnv {
  Matrix u;             // p x d orthonormal
  Matrix y1, y2;        // Sigma_i U
  Matrix m1, m2;        // U' Sigma_i U
  double t11, t12, t22; // trace products of the raw covariances

  const Matrix& y(int i) const { return i == 1 ? y1 : y2; }
  const Matrix& m(int i) const { return i == 1 ? m1 : m2; }
  double t(int i, int l) const {
    if (i == 1 && l == 1) return t11;
    if (i == 2 && l == 2) return t22;
    return t12;
  }
};

/// tr(O1 Sigma_i O2 Sigma_l) without any p x p work.
inline double op_trace(const BasisEnv& env, const BasisOp& o1, int i,
                       const BasisOp& o2, int l) {
  // tr(G M) pairs G entrywise with M', so each mixed term uses the product
  // of the covariances in the opposite order.
  double tr = o1.beta * o2.beta * env.t(i, l);
  tr += o1.beta * (o2.g.cwiseProduct(env.y(i).transpose() * env.y(l))).sum();
  tr += o2.beta * (o1.g.cwiseProduct(env.y(l).transpose() * env.y(i))).sum();
  tr += (o1.g * env.m(i) * o2.g * env.m(l)).trace();
  return tr;
}

inline Vector op_apply(const BasisEnv& env, const BasisOp& o, const Vector& v) {
  return o.beta * v + env.u * (o.g * (env.u.transpose() * v));
}

}  // namespace detail

inline OracleDeltas oracle_deltas(const PopulationTruth& t) {
  require(t.n1 >= 2 && t.n2 >= 2, "sample sizes must be at least 2");
  const double n1 = static_cast<double>(t.n1);
  const double n2 = static_cast<double>(t.n2);
  OracleDeltas out;
  out.delta = t.delta;
  out.delta_a = t.delta_a;

  const double t11 = trace_sq(t.sigma1);
  const double t22 = trace_sq(t.sigma2);
  const double t12 = cross_trace(t.sigma1, t.sigma2);
  const double pair_term = t11 / (2.0 * n1 * (n1 - 1.0)) +
                           t22 / (2.0 * n2 * (n2 - 1.0));
  const Vector mu = t.mu1 - t.mu2;
  {
    const double o1 = t11 / n1 + t12 / n2 + pair_term;
    const double o2 = t22 / n2 + t12 / n1 + pair_term;
    out.d_o[0] = std::sqrt(o1);
    out.d_o[1] = std::sqrt(o2);
    out.d[0] = std::sqrt(o1 + mu.dot(t.sigma1.apply(mu)) +
                         mu.dot(t.sigma2.apply(mu)) / n2);
    out.d[1] = std::sqrt(o2 + mu.dot(t.sigma2.apply(mu)) +
                         mu.dot(t.sigma1.apply(mu)) / n1);
  }

  // Orthonormal basis spanning both spike direction sets.
  const Eigen::Index ktot = t.h1.cols() + t.h2.cols();
  detail::BasisEnv env;
  env.t11 = t11;
  env.t12 = t12;
  env.t22 = t22;
  Matrix u(t.p, ktot);
  Eigen::Index d = 0;
  for (const Matrix* h : {&t.h1, &t.h2}) {
    for (Eigen::Index c = 0; c < h->cols(); ++c) {
      Vector v = h->col(c);
      for (int pass = 0; pass < 2; ++pass)
        if (d > 0) v -= u.leftCols(d) * (u.leftCols(d).transpose() * v);
      const double nv = v.norm();
      if (nv > 1e-10) u.col(d++) = v / nv;
    }
  }
  env.u = u.leftCols(d);
  env.y1.resize(t.p, d);
  env.y2.resize(t.p, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    env.y1.col(c) = t.sigma1.apply(env.u.col(c));
    env.y2.col(c) = t.sigma2.apply(env.u.col(c));
  }
  env.m1 = env.u.transpose() * env.y1;
  env.m2 = env.u.transpose() * env.y2;

  const Matrix c1 = env.u.transpose() * t.h1;
  const Matrix c2 = env.u.transpose() * t.h2;
  const detail::BasisOp a1{1.0, -(c1 * c1.transpose())};
  const detail::BasisOp a2{1.0, -(c2 * c2.transpose())};
  const detail::BasisOp astar{1.0, 0.5 * (a1.g + a2.g)};
  const detail::BasisOp adiff{0.0, a1.g - a2.g};  // A1 - A2 = P2 - P1

  auto proj_cross = [&](int i, int l) {  // tr(Sigma_{i,A*} Sigma_{l,A_l})
    const detail::BasisOp& al = l == 1 ? a1 : a2;
    return detail::op_trace(env, detail::op_mul(al, astar), i,
                            detail::op_mul(astar, al), l);
  };
  const double s1a = detail::op_trace(env, a1, 1, a1, 1);  // tr(Sigma_{1,A}^2)
  const double s2a = detail::op_trace(env, a2, 2, a2, 2);
  const double pair_a = s1a / (2.0 * n1 * (n1 - 1.0)) +
                        s2a / (2.0 * n2 * (n2 - 1.0));
  const double oa1 = proj_cross(1, 1) / n1 + proj_cross(1, 2) / n2 + pair_a;
  const double oa2 = proj_cross(2, 2) / n2 + proj_cross(2, 1) / n1 + pair_a;
  out.d_oa[0] = std::sqrt(std::max(oa1, 0.0));
  out.d_oa[1] = std::sqrt(std::max(oa2, 0.0));

  const Vector mu_a = detail::op_apply(env, a1, t.mu1) -
                      detail::op_apply(env, a2, t.mu2);
  const Vector mu_a_star = detail::op_apply(env, astar, mu_a);
  for (int i = 1; i <= 2; ++i) {
    const StructuredCov& si = i == 1 ? t.sigma1 : t.sigma2;
    const StructuredCov& so = i == 1 ? t.sigma2 : t.sigma1;
    const detail::BasisOp& ai = i == 1 ? a1 : a2;
    const detail::BasisOp& ao = i == 1 ? a2 : a1;
    const double ni = i == 1 ? n1 : n2;
    const double no = i == 1 ? n2 : n1;
    const Vector mui = i == 1 ? t.mu1 : t.mu2;

    const Vector v1 = detail::op_apply(env, ai,
                                       detail::op_apply(env, adiff, mui));
    const Vector w = mu_a - 0.5 * detail::op_apply(env, adiff, mui);
    const Vector v2 = detail::op_apply(env, ao, w);
    const double base = i == 1 ? oa1 : oa2;
    const double total = base + mu_a_star.dot(si.apply(mu_a_star)) +
                         v1.dot(si.apply(v1)) / (4.0 * ni) +
                         v2.dot(so.apply(v2)) / no;
    out.d_a[i - 1] = std::sqrt(std::max(total, 0.0));
  }
  return out;
}

/// Limiting misclassification rates Phi(-gap / (2 sd)) for each class,
/// before (e) and after (e_a) spike removal.
struct AsymptoticError {
  double e[2];
  double e_a[2];
};

inline AsymptoticError asymptotic_error(const OracleDeltas& d) {
  auto rate = [](double gap, double sd) {
    if (gap <= 0.0) return 0.5;
    if (sd <= 0.0) return 0.0;
    return normal_cdf(-gap / (2.0 * sd));
  };
  AsymptoticError e{};
  for (int i = 0; i < 2; ++i) {
    e.e[i] = rate(d.delta, d.d[i]);
    e.e_a[i] = rate(d.delta_a, d.d_a[i]);
  }
  return e;
}

}  // namespace spike
