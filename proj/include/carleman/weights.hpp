#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "carleman/report.hpp"

namespace carleman {

struct WeightTableError : std::runtime_error {
    enum class Kind { length, normalization, convexity };
    Kind kind;
    std::size_t index;
    WeightTableError(Kind k, std::size_t idx, const std::string& what)
        : std::runtime_error(what), kind(k), index(idx) {}
};

/// A log-convex weight sequence M with M_0 = M_1 = 1, stored as a finite
/// table of log M_p. A Gevrey generator (sigma) extends the quotient
/// sequence beyond the table where an evaluation needs it.
class WeightSequence {
public:
    static WeightSequence gevrey(double sigma, std::size_t p_max);
    /// Validates and wraps a raw log M_p table; throws WeightTableError.
    static WeightSequence from_log_table(std::vector<double> log_values);

    std::size_t p_max() const { return d_->log_M.size() - 1; }
    double log_M(std::size_t p) const { return d_->log_M[p]; }
    /// log m_p = log(M_p / M_{p-1}), 1 <= p <= p_max.
    double log_m(std::size_t p) const { return d_->log_m[p - 1]; }
    double m(std::size_t p) const;
    std::optional<double> gevrey_sigma() const { return d_->sigma; }
    /// Smallest index beyond which (log M_p)/p grows monotonically on the table.
    std::size_t growth_index() const { return d_->growth_index; }
    std::span<const double> log_values() const { return d_->log_M; }

private:
    struct Data {
        std::vector<double> log_M;
        std::vector<double> log_m;  // log_m[p-1] = log M_p - log M_{p-1}
        std::optional<double> sigma;
        std::size_t growth_index = 0;
    };
    std::shared_ptr<const Data> d_;
    explicit WeightSequence(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
    static WeightSequence wrap(std::vector<double> log_values, std::optional<double> sigma);
};

/// Non-decreasing sequence with r_0 = r_1 = 1 (membership in the set R of the
/// Roumieu machinery; divergence is reported, never assumed).
class RSequence {
public:
    static RSequence from_values(std::vector<double> values);
    template <class F>
    static RSequence from_generator(F&& f, std::size_t j_max) {
        std::vector<double> v(j_max + 1);
        v[0] = v[1] = 1.0;
        for (std::size_t j = 2; j <= j_max; ++j) v[j] = f(j);
        return from_values(std::move(v));
    }

    std::size_t j_max() const { return values_.size() - 1; }
    double operator[](std::size_t j) const { return values_[j]; }
    std::span<const double> values() const { return values_; }
    bool diverged(double threshold = 1e3) const { return values_.back() >= threshold; }
    /// log prod_{j<=p} r_j
    double log_prefix_product(std::size_t p) const { return log_prefix_[p]; }

private:
    std::vector<double> values_;
    std::vector<double> log_prefix_;
    explicit RSequence(std::vector<double> v);
};

enum class NuBackend { BruteForce, CrossingCount };

struct NuValue {
    double value = 0.0;
    std::size_t argmax_p = 0;
    bool truncated = false;  // brute-force argmax hit the table edge, no generator
    bool extended = false;   // crossing count used the generator beyond the table
};

/// Evaluator for the associated function nu_M(t) = sup_p log(t^p / M_p).
///
/// Backends: brute-force scan of the table, or the crossing-count form
/// sum_{m_p <= t} log(t/m_p) (= P log t - log M_P at the crossing index P),
/// which the Gevrey generator extends past the table.
class AssociatedFunction {
public:
    explicit AssociatedFunction(WeightSequence M, NuBackend backend = NuBackend::CrossingCount)
        : M_(std::move(M)), backend_(backend) {}

    NuValue evaluate(double t) const;
    double operator()(double t) const { return evaluate(t).value; }
    NuValue brute_force(double t) const;
    NuValue crossing_count(double t) const;

    const WeightSequence& weight() const { return M_; }
    NuBackend backend() const { return backend_; }

private:
    WeightSequence M_;
    NuBackend backend_;
};

struct M2Options {
    long H_cap = 64;
    double log_C0_cap = 14.0;  // ~ C0 <= 1.2e6
};
struct M2StarOptions {
    long N_cap = 6;
    long p0_cap = 64;
};
struct FitOptions {
    double step = 0.05;        // multiplicative/additive search grid step
    double cap = 64.0;         // largest constant tried
    double log_C_cap = 25.0;
};

/// (M.2): minimal integer H >= 1, then minimal C0 >= 1, with
/// M_{p+q} <= C0 H^{p+q} M_p M_q for all p+q <= range.
ConditionReport check_M2(const WeightSequence& M, std::size_t range, const M2Options& opt = {});

/// (M.2)*: smallest (N, p0) with 2 m_p <= m_{Np} for all p0 <= p <= range.
ConditionReport check_M2star(const WeightSequence& M, std::size_t range, const M2StarOptions& opt = {});

/// Komatsu's nu-form of (M.2): 2 nu_M(t) <= nu_M(Ht) + log C0 on the grid.
ConditionReport check_nu_M2_inequality(const WeightSequence& M, std::span<const double> t_grid,
                                       double H, double C0);

/// Doubling bound nu_M(2t) <= L nu_M(t) + log C; fits the minimal grid L.
ConditionReport check_nu_doubling(const WeightSequence& M, std::span<const double> t_grid,
                                  const FitOptions& opt = {});

/// Inclusion M subset N: minimal grid L then C with M_p <= C L^p N_p on the
/// range; cross-checks the nu-form nu_N(t) <= nu_M(Lt) + log C on a t-grid.
ConditionReport check_inclusion(const WeightSequence& M, const WeightSequence& N,
                                std::size_t range, const FitOptions& opt = {});

/// Non-triviality gauge: m_p / log p over the tail, its minimum and trend.
ConditionReport check_nontriviality(const WeightSequence& M, std::size_t range,
                                    double trend_factor = 1.05);

struct MergeResult {
    RSequence merged;
    /// Per input: smallest index from which merged <= input holds to the table end.
    std::vector<std::optional<std::size_t>> crossover;
};

/// The R-merge construction: one r that is eventually below every input.
MergeResult merge_rsequences(std::span<const RSequence> inputs, std::size_t j_max);

struct ShrinkResult {
    RSequence r_double_prime;
    RSequence r_prime;       // sqrt of r''
    WeightSequence shrunk;   // N_p = M_p / prod_{j<=p} r'_j
    ConditionReport report;  // aggregated assertions (r' <= r, log-convexity of N)
};

/// Beurling-to-Roumieu reduction: r''_j = min{r_j, r''_{j-1} m_j / m_{j-1}},
/// r'_j = sqrt(r''_j), N = M / prod r'.
ShrinkResult shrink_r(const WeightSequence& M, const RSequence& r);

enum class KLemmaDirection { SomeH, AllH };

struct KLemmaWitness {
    RSequence r;
    double h = 0.0;            // the h used (direction SomeH) or the base step (AllH)
    double witness_sup = 0.0;  // sup a_p / prod r_j  (SomeH)  or  sup a_p * prod r_j (AllH)
    std::string extension_rule;
    std::vector<std::string> notes;
};

/// Growth-condition conversion on a finite table: direction SomeH builds
/// r with sup a_p / prod r_j finite from sup a_p / h^p finite; direction
/// AllH builds r with sup a_p * prod r_j finite from decay beating every h^p.
KLemmaWitness klemma_convert(std::span<const double> a, KLemmaDirection direction,
                             std::optional<double> h = std::nullopt);

/// Same conversion with the sequence given as log a_p (deep tables over- or
/// underflow the plain representation long before the logs do).
KLemmaWitness klemma_convert_log(std::span<const double> log_a, KLemmaDirection direction,
                                 std::optional<double> h = std::nullopt);

}  // namespace carleman
