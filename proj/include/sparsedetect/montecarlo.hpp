#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sparsedetect/designs.hpp"
#include "sparsedetect/model.hpp"
#include "sparsedetect/rng.hpp"
#include "sparsedetect/statistics.hpp"
#include "sparsedetect/tests.hpp"

// ============================================================================
// Seeded replication engine. Every random quantity in replication r of cell
// c is drawn from a Philox stream keyed by (base seed, c, phase|r, purpose),
// so estimates are independent of execution order and thread count, and a
// design column can be regenerated on demand instead of storing the matrix.
// ============================================================================

namespace sparsedetect::montecarlo {

using model::ProblemConfig;
using rules::TestSpec;

// Stream purpose ids; design columns use their column index 0..p-1.
inline constexpr std::uint32_t noise_tag = 0xFFFFFFFFu;
inline constexpr std::uint32_t placement_tag = 0xFFFFFFFEu;

/// Estimated error rates for one (beta, x) cell. gamma_hat = alpha_hat +
/// beta_hat; standard errors are binomial Wald, switching to a Wilson
/// half-width (z = 1) when a phase saw zero or all rejections.
struct CellResult {
    double beta = 0.0;
    double x = 0.0;
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    double gamma_hat = 0.0;
    double se_alpha = 0.0;
    double se_beta = 0.0;
};

/// Per-replication capture for invariance checks (statistic + decision).
struct RepRecord {
    double statistic = 0.0;
    bool reject = false;
};

struct EngineOptions {
    std::size_t threads = 0;   // 0 -> hardware concurrency
    std::uint32_t cell_index = 0;
    bool run_null = true;
    bool run_alt = true;
    bool fixed_theta = false;  // worst-case mode: one theta reused across reps
    // Unknown-variance generation: Y = uv_scale * (X theta + xi). When unset,
    // the known-variance model Y = X theta + sigma * xi is used.
    std::optional<double> uv_scale;
    bool capture = false;      // fill per-rep records
};

struct CellDetail {
    CellResult cell;
    std::vector<RepRecord> null_records;
    std::vector<RepRecord> alt_records;
};

namespace detail {

inline std::uint32_t phase_rep_tag(bool alternative, std::uint32_t rep) {
    return (alternative ? 0x80000000u : 0u) | rep;
}

/// One replication: generate data from the replication's streams, evaluate
/// the rule, return its decision.
inline model::TestDecision run_replication(const ProblemConfig& cfg,
                                           const TestSpec& spec, bool alternative,
                                           std::uint32_t rep,
                                           const EngineOptions& opts,
                                           std::vector<double>& column_buffer) {
    const std::size_t n = cfg.n;
    const std::size_t p = cfg.p;
    const std::uint32_t tag = phase_rep_tag(alternative, rep);
    const std::uint32_t cell = opts.cell_index;

    // Signal (alternative phase only): equal-magnitude theta on a fresh
    // uniformly drawn support, or the rep-0 signal in fixed-theta mode.
    model::SparseSignal theta;
    if (alternative) {
        const std::uint32_t placement_rep =
            opts.fixed_theta ? phase_rep_tag(true, 0) : tag;
        rng::Stream placement(cfg.seed, cell, placement_rep, placement_tag);
        theta = model::place_signal(model::AlternativeSpec(p, cfg.k, cfg.r),
                                    model::SignPattern::random, placement);
    }

    // Response: start from noise, add the signal columns.
    std::vector<double> y(n);
    {
        rng::Stream noise(cfg.seed, cell, tag, noise_tag);
        const double noise_scale = opts.uv_scale ? 1.0 : cfg.sigma;
        for (double& v : y) v = noise_scale * noise.next_gaussian();
    }
    if (alternative) {
        for (std::size_t s = 0; s < theta.support.size(); ++s) {
            const std::size_t j = theta.support[s];
            rng::Stream col(cfg.seed, cell, tag, static_cast<std::uint32_t>(j));
            column_buffer.resize(n);
            designs::fill_column(cfg.design, column_buffer, col);
            const double coeff = theta.coefficients[j];
            for (std::size_t i = 0; i < n; ++i) y[i] += coeff * column_buffer[i];
        }
    }
    if (opts.uv_scale) {
        for (double& v : y) v *= *opts.uv_scale;
    }

    // Statistic inputs. In the known-variance model with sigma != 1, t0/t1
    // see the standardized response; the p-value profile sees Y as observed.
    const bool standardize = !opts.uv_scale && cfg.variance_known && cfg.sigma != 1.0;

    rules::StatBundle bundle;
    bundle.n = n;
    bundle.r = cfg.r;

    const bool want_t0 = rules::uses_t0(spec.name);
    const bool want_t1 = rules::uses_t1(spec.name);
    const bool want_profile = rules::uses_profile(spec.name);

    std::vector<double> y_std;
    std::span<const double> y_for_moments{y};
    if (standardize) {
        y_std.resize(n);
        for (std::size_t i = 0; i < n; ++i) y_std[i] = y[i] / cfg.sigma;
        y_for_moments = y_std;
    }
    if (want_t0) bundle.t0 = stats::t0_statistic(y_for_moments);

    if (want_t1 || want_profile) {
        // In unknown-variance mode the projections are accumulated in
        // extended precision: the scale-invariance contract asks for t_HC
        // agreement to 1e-12 across sigma, and plain double dot products
        // leave rounding residue just above that once small p-values
        // amplify it. The known-variance hot path keeps double speed.
        const bool precise = opts.uv_scale.has_value();
        auto column_pass = [&](auto acc_zero) {
            using acc_t = decltype(acc_zero);
            acc_t y_norm_sq = acc_zero;
            for (double v : y) y_norm_sq += static_cast<acc_t>(v) * v;
            if (want_profile && y_norm_sq == acc_zero) {
                throw std::domain_error("replication: degenerate response ||Y|| = 0");
            }
            const acc_t y_norm = std::sqrt(y_norm_sq);

            std::vector<double> y_values;
            if (want_profile) y_values.resize(p);
            double sum_sq = 0.0, sum_diag = 0.0;
            column_buffer.resize(n);
            for (std::size_t j = 0; j < p; ++j) {
                rng::Stream col(cfg.seed, cell, tag, static_cast<std::uint32_t>(j));
                designs::fill_column(cfg.design, column_buffer, col);
                acc_t dot_raw = acc_zero;
                for (std::size_t i = 0; i < n; ++i) {
                    dot_raw += static_cast<acc_t>(column_buffer[i]) * y[i];
                }
                if (want_profile) {
                    y_values[j] = static_cast<double>(dot_raw / y_norm);
                }
                if (want_t1) {
                    double s = 0.0, q = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double yx = y_for_moments[i] * column_buffer[i];
                        s += yx;
                        q += yx * yx;
                    }
                    sum_sq += s * s;
                    sum_diag += q;
                }
            }
            if (want_t1) bundle.t1 = stats::t1_from_column_sums(sum_sq, sum_diag, n, p);
            if (want_profile) {
                bundle.profile = stats::pvalue_profile_from_y(std::move(y_values));
            }
        };
        if (precise) {
            column_pass(0.0L);
        } else {
            column_pass(0.0);
        }
    }

    return rules::decide_from_bundle(bundle, spec).overall;
}

inline double binomial_se(std::size_t successes, std::size_t m) {
    const double md = static_cast<double>(m);
    const double phat = static_cast<double>(successes) / md;
    if (successes > 0 && successes < m) {
        return std::sqrt(phat * (1.0 - phat) / md);
    }
    // Wilson half-width at z = 1: nonzero even at the boundary.
    const double denom = 1.0 + 1.0 / md;
    return std::sqrt(phat * (1.0 - phat) / md + 1.0 / (4.0 * md * md)) / denom;
}

/// Run one phase: count rejections over reps, optionally recording each.
inline std::size_t run_phase(const ProblemConfig& cfg, const TestSpec& spec,
                             bool alternative, std::size_t reps,
                             const EngineOptions& opts,
                             std::vector<RepRecord>* records) {
    if (records) records->assign(reps, {});
    std::size_t thread_count = opts.threads ? opts.threads
                                            : std::thread::hardware_concurrency();
    if (thread_count == 0) thread_count = 1;
    thread_count = std::min(thread_count, reps == 0 ? std::size_t{1} : reps);

    std::atomic<std::uint32_t> next{0};
    std::atomic<std::size_t> rejections{0};
    auto worker = [&] {
        std::vector<double> buffer;
        std::size_t local = 0;
        for (;;) {
            const std::uint32_t rep = next.fetch_add(1, std::memory_order_relaxed);
            if (rep >= reps) break;
            const model::TestDecision d =
                run_replication(cfg, spec, alternative, rep, opts, buffer);
            if (d.reject) ++local;
            if (records) (*records)[rep] = {d.statistic_value, d.reject};
        }
        rejections.fetch_add(local, std::memory_order_relaxed);
    };

    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rejections.load();
}

inline void validate(const ProblemConfig& cfg, const TestSpec& spec) {
    if (!cfg.variance_known && !rules::scale_invariant(spec.name)) {
        throw std::domain_error(rules::test_name(spec.name) +
                                " requires known variance");
    }
    if (rules::uses_profile(spec.name) && cfg.p < 3) {
        throw std::domain_error("hc test: need p >= 3 so log log p > 0");
    }
    if (rules::uses_t1(spec.name) && cfg.n < 2) {
        throw std::domain_error("psi1: need n >= 2");
    }
    if (rules::uses_profile(spec.name)) (void)rules::hc_threshold(cfg.p, spec.a);
    if (spec.name == rules::TestKind::psi0_T && !spec.t_np && !(cfg.r > 0.0)) {
        throw std::domain_error("psi0_T: need r > 0");
    }
}

}  // namespace detail

/// Estimate type I / type II / total error of a rule by seeded replication:
/// alpha_hat over null draws, beta_hat over alternative draws with a fresh
/// theta, X, xi each replication.
inline CellDetail estimate_errors_detailed(const ProblemConfig& cfg,
                                           const TestSpec& spec, std::size_t reps,
                                           EngineOptions opts = {}) {
    if (reps < 1) throw std::domain_error("estimate_errors: need reps >= 1");
    detail::validate(cfg, spec);

    CellDetail out;
    out.cell.beta = cfg.beta;
    out.cell.x = cfg.x;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.cell.alpha_hat = out.cell.se_alpha = nan;
    out.cell.beta_hat = out.cell.se_beta = nan;

    if (opts.run_null) {
        const std::size_t rej = detail::run_phase(cfg, spec, false, reps, opts,
                                                  opts.capture ? &out.null_records
                                                               : nullptr);
        out.cell.alpha_hat = static_cast<double>(rej) / static_cast<double>(reps);
        out.cell.se_alpha = detail::binomial_se(rej, reps);
    }
    if (opts.run_alt) {
        const std::size_t rej = detail::run_phase(cfg, spec, true, reps, opts,
                                                  opts.capture ? &out.alt_records
                                                               : nullptr);
        out.cell.beta_hat =
            static_cast<double>(reps - rej) / static_cast<double>(reps);
        out.cell.se_beta = detail::binomial_se(reps - rej, reps);
    }
    out.cell.gamma_hat = out.cell.alpha_hat + out.cell.beta_hat;
    return out;
}

inline CellResult estimate_errors(const ProblemConfig& cfg, const TestSpec& spec,
                                  std::size_t reps, EngineOptions opts = {}) {
    return estimate_errors_detailed(cfg, spec, reps, opts).cell;
}

/// Grid of (beta, x) cells over fixed (n, p, design, sigma mode).
struct SweepGrid {
    std::vector<double> beta_values;
    std::vector<double> x_values;
    std::size_t n = 0;
    std::size_t p = 0;
    model::DesignKind design = model::DesignKind::gaussian_iid;
    double sigma = 1.0;
    bool variance_known = true;
    std::size_t reps_per_cell = 0;
    std::uint64_t base_seed = 1;

    void validate() const {
        if (beta_values.empty() || x_values.empty()) {
            throw std::domain_error("sweep: empty grid");
        }
        auto increasing = [](const std::vector<double>& v) {
            for (std::size_t i = 1; i < v.size(); ++i) {
                if (!(v[i] > v[i - 1])) return false;
            }
            return true;
        };
        if (!increasing(beta_values) || !increasing(x_values)) {
            throw std::domain_error("sweep: grids must be strictly increasing");
        }
        if (reps_per_cell < 1) throw std::domain_error("sweep: need reps >= 1");
    }

    model::ProblemConfig cell_config(std::size_t bi, std::size_t xi) const {
        model::ConfigInput in;
        in.n = n;
        in.p = p;
        in.beta = beta_values[bi];
        in.x = x_values[xi];
        in.sigma = sigma;
        in.variance_known = variance_known;
        in.design = design;
        in.seed = base_seed;
        return model::resolve_config(in);
    }
};

/// One CellResult per (beta, x) cell, in row-major (beta, x) order. The
/// replication streams are keyed by the cell's grid position, so results do
/// not depend on execution order or thread count.
inline std::vector<CellResult> run_sweep(const SweepGrid& grid, const TestSpec& spec,
                                         std::size_t threads = 0) {
    grid.validate();
    std::vector<CellResult> results;
    results.reserve(grid.beta_values.size() * grid.x_values.size());
    for (std::size_t bi = 0; bi < grid.beta_values.size(); ++bi) {
        for (std::size_t xi = 0; xi < grid.x_values.size(); ++xi) {
            EngineOptions opts;
            opts.threads = threads;
            opts.cell_index = static_cast<std::uint32_t>(bi * grid.x_values.size() + xi);
            // unknown variance: alternatives sigma*theta with noise sd sigma
            if (!grid.variance_known) opts.uv_scale = grid.sigma;
            results.push_back(
                estimate_errors(grid.cell_config(bi, xi), spec, grid.reps_per_cell, opts));
        }
    }
    return results;
}

struct SigmaCellResult {
    double sigma = 1.0;
    CellResult cell;
    std::vector<RepRecord> null_records;
    std::vector<RepRecord> alt_records;
};

struct UnknownVarianceReport {
    std::vector<SigmaCellResult> cells;  // sigma-major, then (beta, x) order
    bool sigma_sensitive = false;        // decisions differed across sigma
};

/// Error estimation under unknown variance: data are generated as
/// Y = sigma (X theta + xi) -- the alternative is sigma * theta -- and the
/// rule is evaluated exactly as in the sigma = 1 case (no standardization,
/// since sigma is unknown to the test). Replication streams do not depend
/// on sigma, so scale-invariant rules must decide identically across the
/// sigma grid; any mismatch sets sigma_sensitive.
inline UnknownVarianceReport unknown_variance_sweep(const SweepGrid& grid,
                                                    const std::vector<double>& sigma_values,
                                                    const TestSpec& spec,
                                                    std::size_t threads = 0,
                                                    bool capture = false) {
    grid.validate();
    if (sigma_values.empty()) throw std::domain_error("sweep: empty sigma grid");
    for (double s : sigma_values) {
        if (!(s > 0.0)) throw std::domain_error("sweep: need sigma > 0");
    }

    UnknownVarianceReport report;
    for (double sigma : sigma_values) {
        for (std::size_t bi = 0; bi < grid.beta_values.size(); ++bi) {
            for (std::size_t xi = 0; xi < grid.x_values.size(); ++xi) {
                EngineOptions opts;
                opts.threads = threads;
                opts.cell_index =
                    static_cast<std::uint32_t>(bi * grid.x_values.size() + xi);
                opts.uv_scale = sigma;
                opts.capture = true;  // needed for the sensitivity check
                model::ProblemConfig cfg = grid.cell_config(bi, xi);
                // The rule is evaluated exactly as a sigma = 1 user would:
                // sigma enters only through the generated data.
                cfg.variance_known = true;
                cfg.sigma = 1.0;
                CellDetail detail =
                    estimate_errors_detailed(cfg, spec, grid.reps_per_cell, opts);
                SigmaCellResult entry;
                entry.sigma = sigma;
                entry.cell = detail.cell;
                entry.null_records = std::move(detail.null_records);
                entry.alt_records = std::move(detail.alt_records);
                report.cells.push_back(std::move(entry));
            }
        }
    }

    // Matched-seed decisions must agree across sigma for a scale-invariant rule.
    const std::size_t per_sigma = grid.beta_values.size() * grid.x_values.size();
    for (std::size_t c = 0; c < per_sigma; ++c) {
        const auto& ref = report.cells[c];
        for (std::size_t s = 1; s < sigma_values.size(); ++s) {
            const auto& other = report.cells[s * per_sigma + c];
            for (std::size_t r = 0; r < ref.null_records.size(); ++r) {
                if (ref.null_records[r].reject != other.null_records[r].reject ||
                    ref.alt_records[r].reject != other.alt_records[r].reject) {
                    report.sigma_sensitive = true;
                }
            }
        }
    }
    if (!capture) {
        for (auto& entry : report.cells) {
            entry.null_records.clear();
            entry.alt_records.clear();
        }
    }
    return report;
}

}  // namespace sparsedetect::montecarlo
