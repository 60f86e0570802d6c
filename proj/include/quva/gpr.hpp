#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "quva/ansatz.hpp"
#include "quva/rng.hpp"

namespace quva {

/// RBF kernel hyperparameters. Angles are lifted to (cos, sin) pairs before
/// the Euclidean distance is taken, so the kernel respects the 2*pi
/// periodicity of every observable in this library.
struct KernelParams {
    double signal_std = 1.0;   // sigma_f
    double length_scale = 1.0; // l, in the lifted space
    double noise_std = 1e-6;   // sigma_n
};

struct SearchConfig {
    int n_random_init = 600;
    int n_guided = 600;
    double p_c = 1.0;
    int candidate_pool_size = 256;
    int refit_every = 25;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_random_init < 1 || n_guided < 0) throw std::invalid_argument("search counts must be >= 1");
        if (p_c <= 0.0) throw std::invalid_argument("p_c must be > 0");
        if (candidate_pool_size < 1) throw std::invalid_argument("candidate pool size must be >= 1");
        if (refit_every < 1) throw std::invalid_argument("refit cadence must be >= 1");
    }
};

namespace detail {

inline Eigen::RowVectorXd lift_angles(const ParameterVector& lambda) {
    Eigen::RowVectorXd z(2 * lambda.size());
    for (size_t j = 0; j < lambda.size(); ++j) {
        z(2 * j) = std::cos(lambda[j]);
        z(2 * j + 1) = std::sin(lambda[j]);
    }
    return z;
}

}  // namespace detail

/// GP surrogate of the total-expectation landscape over the angle torus.
/// Holds the training set, the kernel, and the cached Cholesky factor of
/// K + (sigma_n^2 + jitter) I. The prior mean is fitted to the sample mean
/// of the observations, so queries far from all data revert to the
/// empirical level rather than to zero; with a zero prior mean every
/// unexplored point would masquerade as a perfect root and the level-set
/// acquisition would degenerate into space filling.
struct GPRModel {
    std::vector<ParameterVector> inputs;
    Eigen::MatrixXd lifted;  // n x 2k
    Eigen::VectorXd values;
    KernelParams kernel;
    double prior_mean = 0.0;
    Eigen::MatrixXd chol_l;
    Eigen::VectorXd alpha;
    double jitter = 0.0;
    int param_dim = 0;

    bool fitted() const { return alpha.size() > 0; }
    int size() const { return static_cast<int>(values.size()); }
};

/// Fixed hyperparameters, or evidence maximization by multistart Nelder-Mead
/// over (log sigma_f, log l, log sigma_n).
struct HyperFixed {
    KernelParams params;
};
struct HyperMaximizeEvidence {
    int multistarts = 6;
    int max_iters = 150;
    std::uint64_t seed = 0;
};
using HyperMode = std::variant<HyperFixed, HyperMaximizeEvidence>;

/// sigma_f = sample std of the observations, l = 1 in the lifted space,
/// sigma_n = 1e-6 sigma_f raised to `noise_floor` when shot noise is present.
inline KernelParams default_kernel_params(const Eigen::VectorXd& values, double noise_floor = 0.0) {
    KernelParams p;
    const Eigen::Index n = values.size();
    if (n >= 2) {
        const double mean = values.mean();
        const double var = (values.array() - mean).square().sum() / static_cast<double>(n - 1);
        p.signal_std = std::sqrt(std::max(var, 0.0));
    }
    if (p.signal_std < 1e-12) p.signal_std = std::max(1e-8 * (1.0 + std::abs(values.size() ? values(0) : 0.0)), 1e-8);
    p.length_scale = 1.0;
    p.noise_std = std::max(1e-6 * p.signal_std, noise_floor);
    return p;
}

namespace detail {

inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& lifted, const KernelParams& kp) {
    const Eigen::Index n = lifted.rows();
    const double sf2 = kp.signal_std * kp.signal_std;
    const double inv2l2 = 1.0 / (2.0 * kp.length_scale * kp.length_scale);
    Eigen::VectorXd sq = lifted.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * lifted * lifted.transpose()).rowwise() + sq.transpose();
    d2.colwise() += sq;
    return sf2 * (-d2.cwiseMax(0.0) * inv2l2).array().exp().matrix();
}

/// Cholesky with an escalating jitter ladder; throws with diagnostics when
/// the kernel matrix stays indefinite.
inline void factorize(GPRModel& model) {
    const Eigen::Index n = model.lifted.rows();
    Eigen::MatrixXd k = kernel_matrix(model.lifted, model.kernel);
    const double sn2 = model.kernel.noise_std * model.kernel.noise_std;
    const double unit = std::max(1.0, model.kernel.signal_std * model.kernel.signal_std);
    const double ladder[] = {0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
    for (double j : ladder) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += sn2 + j * unit;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success) {
            model.chol_l = llt.matrixL();
            model.jitter = j * unit;
            model.alpha = llt.solve((model.values.array() - model.prior_mean).matrix().eval());
            return;
        }
    }
    throw std::runtime_error("kernel matrix not positive definite after max jitter (n = " + std::to_string(n) +
                             ", sigma_f = " + std::to_string(model.kernel.signal_std) +
                             ", l = " + std::to_string(model.kernel.length_scale) + ")");
}

inline double log_marginal_likelihood(const Eigen::MatrixXd& lifted, const Eigen::VectorXd& values,
                                      const KernelParams& kp) {
    Eigen::MatrixXd k = kernel_matrix(lifted, kp);
    k.diagonal().array() += kp.noise_std * kp.noise_std + 1e-12;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd centered = (values.array() - values.mean()).matrix();
    Eigen::VectorXd alpha = llt.solve(centered);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) logdet += std::log(llt.matrixL()(i, i));
    return -0.5 * centered.dot(alpha) - logdet -
           0.5 * static_cast<double>(values.size()) * std::log(2.0 * std::numbers::pi);
}

/// Gradient-free Nelder-Mead ascent on the log evidence in log-parameter
/// space. Small and deterministic; good enough for a 3-dimensional search.
inline KernelParams maximize_evidence(const Eigen::MatrixXd& lifted, const Eigen::VectorXd& values,
                                      const HyperMaximizeEvidence& opts) {
    auto objective = [&](const Eigen::Vector3d& t) {
        KernelParams kp{std::exp(t(0)), std::exp(t(1)), std::exp(t(2))};
        return log_marginal_likelihood(lifted, values, kp);
    };

    const KernelParams d0 = default_kernel_params(values);
    Eigen::Vector3d best_t(std::log(d0.signal_std), std::log(d0.length_scale), std::log(d0.noise_std));
    double best_v = objective(best_t);

    rng::Stream stream(rng::mix(opts.seed, 0xE71DULL));
    const Eigen::Vector3d base(std::log(d0.signal_std), std::log(d0.length_scale), std::log(d0.noise_std));
    for (int start = 0; start < opts.multistarts; ++start) {
        Eigen::Vector3d t0 = base;
        if (start > 0)
            for (int i = 0; i < 3; ++i) t0(i) = base(i) + stream.uniform(-1.5, 1.5);
        // Nelder-Mead simplex
        std::vector<Eigen::Vector3d> pts(4, t0);
        for (int i = 1; i < 4; ++i) pts[i](i - 1) += 0.5;
        std::vector<double> vals(4);
        for (int i = 0; i < 4; ++i) vals[i] = objective(pts[i]);
        for (int it = 0; it < opts.max_iters; ++it) {
            // sort ascending (we maximize, worst first)
            std::vector<int> ord{0, 1, 2, 3};
            std::sort(ord.begin(), ord.end(), [&](int a, int b) { return vals[a] < vals[b]; });
            const int worst = ord[0], second = ord[1], bi = ord[3];
            Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
            for (int i : {ord[1], ord[2], ord[3]}) centroid += pts[i];
            centroid /= 3.0;
            Eigen::Vector3d refl = centroid + (centroid - pts[worst]);
            double vr = objective(refl);
            if (vr > vals[bi]) {
                Eigen::Vector3d exp_pt = centroid + 2.0 * (centroid - pts[worst]);
                double ve = objective(exp_pt);
                if (ve > vr) { pts[worst] = exp_pt; vals[worst] = ve; }
                else { pts[worst] = refl; vals[worst] = vr; }
            } else if (vr > vals[second]) {
                pts[worst] = refl;
                vals[worst] = vr;
            } else {
                Eigen::Vector3d contr = centroid + 0.5 * (pts[worst] - centroid);
                double vc = objective(contr);
                if (vc > vals[worst]) { pts[worst] = contr; vals[worst] = vc; }
                else {
                    for (int i = 0; i < 4; ++i) {
                        if (i == bi) continue;
                        pts[i] = pts[bi] + 0.5 * (pts[i] - pts[bi]);
                        vals[i] = objective(pts[i]);
                    }
                }
            }
            if ((pts[ord[3]] - pts[ord[0]]).norm() < 1e-6) break;
        }
        for (int i = 0; i < 4; ++i)
            if (vals[i] > best_v) { best_v = vals[i]; best_t = pts[i]; }
    }
    return KernelParams{std::exp(best_t(0)), std::exp(best_t(1)), std::exp(best_t(2))};
}

}  // namespace detail

/// Fits the surrogate: deduplicates near-identical inputs (latest wins),
/// resolves hyperparameters per `mode`, and caches the factorization.
inline GPRModel fit(const std::vector<ParameterVector>& inputs, const std::vector<double>& values,
                    const HyperMode& mode) {
    if (inputs.size() != values.size()) throw std::invalid_argument("inputs/values length mismatch");
    if (inputs.size() < 2) throw std::invalid_argument("GP fit needs at least 2 points");
    const size_t k = inputs.front().size();
    for (const auto& x : inputs)
        if (x.size() != k) throw std::invalid_argument("inconsistent parameter dimensions");

    // Dedup within 1e-9 in the lifted space, keeping the latest observation.
    std::vector<Eigen::RowVectorXd> lifted_all(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) lifted_all[i] = detail::lift_angles(inputs[i]);
    std::vector<bool> keep(inputs.size(), true);
    for (size_t i = 0; i < inputs.size(); ++i) {
        for (size_t j = i + 1; j < inputs.size(); ++j) {
            if (!keep[j]) continue;
            if ((lifted_all[i] - lifted_all[j]).norm() < 1e-9) { keep[i] = false; break; }
        }
    }

    GPRModel model;
    model.param_dim = static_cast<int>(k);
    for (size_t i = 0; i < inputs.size(); ++i) {
        if (!keep[i]) continue;
        model.inputs.push_back(inputs[i]);
    }
    const Eigen::Index n = static_cast<Eigen::Index>(model.inputs.size());
    if (n < 2) throw std::invalid_argument("GP fit needs at least 2 distinct points");
    model.lifted.resize(n, static_cast<Eigen::Index>(2 * k));
    model.values.resize(n);
    Eigen::Index row = 0;
    for (size_t i = 0; i < inputs.size(); ++i) {
        if (!keep[i]) continue;
        model.lifted.row(row) = lifted_all[i];
        model.values(row) = values[i];
        ++row;
    }

    model.prior_mean = model.values.mean();
    if (std::holds_alternative<HyperFixed>(mode)) model.kernel = std::get<HyperFixed>(mode).params;
    else model.kernel = detail::maximize_evidence(model.lifted, model.values, std::get<HyperMaximizeEvidence>(mode));
    detail::factorize(model);
    return model;
}

struct Posterior {
    double mean = 0.0;
    double std = 0.0;
};

namespace detail {

inline void cross_kernel(const GPRModel& m, const Eigen::MatrixXd& queries, Eigen::MatrixXd& kstar) {
    const double sf2 = m.kernel.signal_std * m.kernel.signal_std;
    const double inv2l2 = 1.0 / (2.0 * m.kernel.length_scale * m.kernel.length_scale);
    Eigen::VectorXd sq_train = m.lifted.rowwise().squaredNorm();
    Eigen::VectorXd sq_query = queries.rowwise().squaredNorm();
    kstar = (-2.0 * m.lifted * queries.transpose()).colwise() + sq_train;
    kstar.rowwise() += sq_query.transpose();
    kstar = sf2 * (-kstar.cwiseMax(0.0) * inv2l2).array().exp().matrix();
}

}  // namespace detail

/// Predictive mean and standard deviation at several lifted query rows.
inline void posterior_batch(const GPRModel& model, const Eigen::MatrixXd& lifted_queries, Eigen::VectorXd& means,
                            Eigen::VectorXd& stds) {
    if (!model.fitted()) throw std::invalid_argument("posterior on an unfitted model");
    Eigen::MatrixXd kstar;
    detail::cross_kernel(model, lifted_queries, kstar);  // n x m
    means = (kstar.transpose() * model.alpha).array() + model.prior_mean;
    Eigen::MatrixXd v = model.chol_l.triangularView<Eigen::Lower>().solve(kstar);
    const double sf2 = model.kernel.signal_std * model.kernel.signal_std;
    stds = (sf2 - v.colwise().squaredNorm().array()).max(0.0).sqrt().transpose();
}

inline Posterior posterior(const GPRModel& model, const ParameterVector& query) {
    Eigen::MatrixXd q(1, 2 * query.size());
    q.row(0) = detail::lift_angles(query);
    Eigen::VectorXd mean, std_;
    posterior_batch(model, q, mean, std_);
    return {mean(0), std_(0)};
}

// ---------------------------------------------------------------------------
// acquisition: expected feasibility of the zero level

/// Expected mass of max(eps - |Y|, 0) for Y ~ N(mean, std^2) with the band
/// eps = 2 std. Large when the predicted value is near zero or the
/// uncertainty is high; tends to zero as std -> 0 or |mean| -> infinity.
inline double acquisition_value(double mean, double std) {
    if (!(std > 0.0)) return 0.0;
    const double eps = 2.0 * std;
    const double a = (-eps - mean) / std;
    const double b = (eps - mean) / std;
    const double m0 = -mean / std;
    auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
    auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    return eps * (cdf(b) - cdf(a)) - mean * (cdf(b) - 2.0 * cdf(m0) + cdf(a)) +
           std * (phi(b) - 2.0 * phi(m0) + phi(a));
}

inline double acquisition(const GPRModel& model, const ParameterVector& query) {
    const Posterior p = posterior(model, query);
    return acquisition_value(p.mean, p.std);
}

/// Argmax of the acquisition over a seeded random pool in [0, 2*pi)^k plus a
/// wrapped coordinate-descent refinement. Deterministic for a given
/// (model, cfg.seed, round).
inline ParameterVector propose_next(const GPRModel& model, const SearchConfig& cfg, std::uint64_t round = 0) {
    if (!model.fitted()) throw std::invalid_argument("propose_next on an unfitted model");
    const int k = model.param_dim;
    rng::Stream stream(rng::mix(cfg.seed, 0x505250ULL + round));

    const int m = cfg.candidate_pool_size;
    std::vector<ParameterVector> pool(m, ParameterVector(k));
    Eigen::MatrixXd lifted(m, 2 * k);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) pool[i][j] = stream.uniform(0.0, 2.0 * std::numbers::pi);
        lifted.row(i) = detail::lift_angles(pool[i]);
    }
    Eigen::VectorXd means, stds;
    posterior_batch(model, lifted, means, stds);
    int best = 0;
    double best_v = -1.0;
    for (int i = 0; i < m; ++i) {
        const double v = acquisition_value(means(i), stds(i));
        if (v > best_v) { best_v = v; best = i; }
    }

    ParameterVector x = pool[best];
    auto wrap = [](double a) {
        const double two_pi = 2.0 * std::numbers::pi;
        a = std::fmod(a, two_pi);
        return a < 0.0 ? a + two_pi : a;
    };
    const double steps[] = {0.8, 0.4, 0.2, 0.1, 0.05, 0.02, 0.008};
    for (int sweep = 0; sweep < 3; ++sweep) {
        bool improved = false;
        for (double step : steps) {
            for (int j = 0; j < k; ++j) {
                for (double dir : {+1.0, -1.0}) {
                    ParameterVector y = x;
                    y[j] = wrap(y[j] + dir * step);
                    const double v = acquisition(model, y);
                    if (v > best_v) {
                        best_v = v;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        if (!improved) break;
    }
    return x;
}

/// Exploitation counterpart of propose_next: wrapped coordinate descent on
/// |posterior mean| from a seeded jitter of `anchor`. Because the prior mean
/// is the empirical level (far from zero), the descent cannot wander into
/// unexplored space; it stays where the surrogate is trustworthy and lands
/// near the predicted zero level set. Deterministic for a given
/// (model, cfg.seed, round).
inline ParameterVector polish_toward_zero(const GPRModel& model, const ParameterVector& anchor,
                                          const SearchConfig& cfg, std::uint64_t round = 0) {
    if (!model.fitted()) throw std::invalid_argument("polish_toward_zero on an unfitted model");
    const int k = model.param_dim;
    if (static_cast<int>(anchor.size()) != k) throw std::invalid_argument("anchor dimension mismatch");
    rng::Stream stream(rng::mix(cfg.seed, 0x704C53ULL + round));
    auto wrap = [](double a) {
        const double two_pi = 2.0 * std::numbers::pi;
        a = std::fmod(a, two_pi);
        return a < 0.0 ? a + two_pi : a;
    };
    ParameterVector x = anchor;
    for (double& v : x) v = wrap(v + stream.uniform(-0.25, 0.25));
    double best = std::abs(posterior(model, x).mean);
    const double steps[] = {0.4, 0.2, 0.1, 0.05, 0.02, 0.008, 0.003};
    for (int sweep = 0; sweep < 3; ++sweep) {
        bool improved = false;
        for (double step : steps) {
            for (int j = 0; j < k; ++j) {
                for (double dir : {+1.0, -1.0}) {
                    ParameterVector y = x;
                    y[j] = wrap(y[j] + dir * step);
                    const double v = std::abs(posterior(model, y).mean);
                    if (v < best) {
                        best = v;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        if (!improved) break;
    }
    return x;
}

/// Extends the cached factorization with one observation at fixed
/// hyperparameters (O(n^2) Cholesky append).
inline void append_observation(GPRModel& model, const ParameterVector& x, double y) {
    if (!model.fitted()) throw std::invalid_argument("append_observation on an unfitted model");
    const Eigen::Index n = model.lifted.rows();
    Eigen::RowVectorXd z = detail::lift_angles(x);

    Eigen::MatrixXd q(1, z.size());
    q.row(0) = z;
    Eigen::MatrixXd kstar;
    detail::cross_kernel(model, q, kstar);  // n x 1
    const double sf2 = model.kernel.signal_std * model.kernel.signal_std;
    const double kxx = sf2 + model.kernel.noise_std * model.kernel.noise_std + model.jitter;

    Eigen::VectorXd w = model.chol_l.triangularView<Eigen::Lower>().solve(kstar.col(0));
    double d2 = kxx - w.squaredNorm();
    if (d2 < 1e-12 * kxx) d2 = 1e-12 * kxx;  // near-duplicate guard

    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(n + 1, n + 1);
    grown.topLeftCorner(n, n) = model.chol_l;
    grown.row(n).head(n) = w.transpose();
    grown(n, n) = std::sqrt(d2);
    model.chol_l = std::move(grown);

    model.lifted.conservativeResize(n + 1, Eigen::NoChange);
    model.lifted.row(n) = z;
    model.values.conservativeResize(n + 1);
    model.values(n) = y;
    model.inputs.push_back(x);

    // Prior mean stays fixed until the next full refit.
    const Eigen::VectorXd centered = (model.values.array() - model.prior_mean).matrix();
    Eigen::VectorXd tmp = model.chol_l.triangularView<Eigen::Lower>().solve(centered);
    model.alpha = model.chol_l.transpose().triangularView<Eigen::Upper>().solve(tmp);
}

}  // namespace quva
