#include "carleman/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace carleman {

namespace {
constexpr double kLogSlack = 1e-12;  // rounding slack for comparisons in log space

std::string idx_msg(const char* what, std::size_t p) {
    std::ostringstream os;
    os << what << " at p = " << p;
    return os.str();
}
}  // namespace

WeightSequence WeightSequence::wrap(std::vector<double> log_values, std::optional<double> sigma) {
    auto d = std::make_shared<Data>();
    d->log_M = std::move(log_values);
    d->sigma = sigma;
    const std::size_t n = d->log_M.size();
    d->log_m.resize(n - 1);
    for (std::size_t p = 1; p < n; ++p) d->log_m[p - 1] = d->log_M[p] - d->log_M[p - 1];
    // first index beyond which (log M_p)/p is non-decreasing to the table end
    d->growth_index = n - 1;
    for (std::size_t p = n - 1; p >= 2; --p) {
        if (d->log_M[p] / double(p) + kLogSlack < d->log_M[p - 1] / double(p - 1)) break;
        d->growth_index = p - 1;
    }
    return WeightSequence(std::move(d));
}

WeightSequence WeightSequence::gevrey(double sigma, std::size_t p_max) {
    if (!(sigma > 0.0)) throw PreconditionError("gevrey: sigma must be positive");
    if (p_max < 2) throw PreconditionError("gevrey: p_max must be >= 2");
    std::vector<double> lv(p_max + 1);
    for (std::size_t p = 0; p <= p_max; ++p) lv[p] = sigma * std::lgamma(double(p) + 1.0);
    return wrap(std::move(lv), sigma);
}

WeightSequence WeightSequence::from_log_table(std::vector<double> log_values) {
    using Kind = WeightTableError::Kind;
    if (log_values.size() < 3)
        throw WeightTableError(Kind::length, log_values.size(), "table needs at least 3 entries");
    if (std::abs(log_values[0]) > kLogSlack)
        throw WeightTableError(Kind::normalization, 0, "M_0 != 1");
    if (std::abs(log_values[1]) > kLogSlack)
        throw WeightTableError(Kind::normalization, 1, "M_1 != 1");
    for (std::size_t p = 1; p + 1 < log_values.size(); ++p) {
        if (2.0 * log_values[p] > log_values[p - 1] + log_values[p + 1] + kLogSlack)
            throw WeightTableError(Kind::convexity, p, idx_msg("log-convexity violated", p));
    }
    return wrap(std::move(log_values), std::nullopt);
}

double WeightSequence::m(std::size_t p) const { return std::exp(log_m(p)); }

RSequence::RSequence(std::vector<double> v) : values_(std::move(v)) {
    log_prefix_.resize(values_.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
        acc += std::log(values_[j]);
        log_prefix_[j] = acc;
    }
}

RSequence RSequence::from_values(std::vector<double> values) {
    if (values.size() < 2) throw PreconditionError("RSequence: need at least r_0, r_1");
    if (std::abs(values[0] - 1.0) > kLogSlack || std::abs(values[1] - 1.0) > kLogSlack)
        throw PreconditionError("RSequence: r_0 = r_1 = 1 required");
    for (std::size_t j = 1; j < values.size(); ++j) {
        if (values[j] + kLogSlack < values[j - 1])
            throw PreconditionError(idx_msg("RSequence: not non-decreasing", j));
        if (!(values[j] > 0.0)) throw PreconditionError(idx_msg("RSequence: non-positive", j));
    }
    return RSequence(std::move(values));
}

// ---------------------------------------------------------------------------
// associated function

NuValue AssociatedFunction::brute_force(double t) const {
    if (t < 0.0) throw PreconditionError("associated_nu: t must be >= 0");
    NuValue out;
    if (t <= 0.0) return out;  // sup attained at p = 0
    const double logt = std::log(t);
    double best = 0.0;
    std::size_t best_p = 0;
    for (std::size_t p = 1; p <= M_.p_max(); ++p) {
        const double v = double(p) * logt - M_.log_M(p);
        if (v >= best) {
            best = v;
            best_p = p;
        }
    }
    out.value = best;
    out.argmax_p = best_p;
    out.truncated = (best_p == M_.p_max()) && !M_.gevrey_sigma();
    return out;
}

NuValue AssociatedFunction::crossing_count(double t) const {
    if (t < 0.0) throw PreconditionError("associated_nu: t must be >= 0");
    NuValue out;
    if (t <= 1.0) return out;  // m_1 = 1, so no quotient below t contributes
    const double logt = std::log(t);
    // P = #{p >= 1 : m_p <= t}; quotients are non-decreasing by log-convexity.
    const auto& lm = M_;
    std::size_t lo = 1, hi = lm.p_max();
    if (lm.log_m(hi) <= logt) {
        if (auto sigma = lm.gevrey_sigma()) {
            // generator extension: m_p = p^sigma, so P = floor(t^{1/sigma})
            const double pf = std::floor(std::pow(t, 1.0 / *sigma));
            const double P = std::max(1.0, pf);
            out.value = P * logt - *sigma * std::lgamma(P + 1.0);
            out.argmax_p = static_cast<std::size_t>(P);
            out.extended = out.argmax_p > lm.p_max();
            return out;
        }
        out.value = double(hi) * logt - lm.log_M(hi);
        out.argmax_p = hi;
        out.truncated = true;
        return out;
    }
    // binary search for the last p with log m_p <= log t
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (lm.log_m(mid) <= logt)
            lo = mid;
        else
            hi = mid - 1;
    }
    const std::size_t P = lo;
    out.value = double(P) * logt - lm.log_M(P);
    out.argmax_p = P;
    return out;
}

NuValue AssociatedFunction::evaluate(double t) const {
    return backend_ == NuBackend::BruteForce ? brute_force(t) : crossing_count(t);
}

// ---------------------------------------------------------------------------
// condition checks

ConditionReport check_M2(const WeightSequence& M, std::size_t range, const M2Options& opt) {
    if (range > M.p_max()) throw PreconditionError("check_M2: range exceeds table");
    ConditionReport rep;
    rep.condition = "(M.2)";
    rep.checked_range = long(range);
    double best_slack = std::numeric_limits<double>::infinity();
    std::pair<long, long> worst{0, 0};
    for (long H = 1; H <= opt.H_cap; ++H) {
        const double logH = std::log(double(H));
        double slack = -std::numeric_limits<double>::infinity();
        std::pair<long, long> arg{0, 0};
        for (std::size_t p = 0; p <= range; ++p) {
            const double base = M.log_M(p);
            for (std::size_t q = 0; q <= range - p; ++q) {
                const double s = M.log_M(p + q) - base - M.log_M(q) - double(p + q) * logH;
                if (s > slack) {
                    slack = s;
                    arg = {long(p), long(q)};
                }
            }
        }
        if (slack <= opt.log_C0_cap + kLogSlack) {
            rep.holds = true;
            rep.constants["H"] = double(H);
            rep.constants["C0"] = std::exp(std::max(0.0, slack));
            rep.max_slack = slack;
            return rep;
        }
        if (slack < best_slack) {
            best_slack = slack;
            worst = arg;
        }
    }
    rep.holds = false;
    rep.max_slack = best_slack;
    rep.first_violation = worst;
    rep.notes.push_back("no H <= cap kept log C0 below the cap");
    return rep;
}

ConditionReport check_M2star(const WeightSequence& M, std::size_t range, const M2StarOptions& opt) {
    if (range * std::size_t(opt.N_cap) > M.p_max())
        throw PreconditionError("check_M2star: range * N_cap exceeds table");
    ConditionReport rep;
    rep.condition = "(M.2)*";
    rep.checked_range = long(range);
    const double log2 = std::log(2.0);
    for (long N = 1; N <= opt.N_cap; ++N) {
        long last_violation = 0;
        for (std::size_t p = 1; p <= range; ++p) {
            if (log2 + M.log_m(p) > M.log_m(std::size_t(N) * p) + kLogSlack)
                last_violation = long(p);
        }
        const long p0 = last_violation + 1;
        if (p0 <= opt.p0_cap) {
            rep.holds = true;
            rep.constants["N"] = double(N);
            rep.constants["p0"] = double(p0);
            return rep;
        }
    }
    rep.holds = false;
    // witness: the largest violating p for the largest N tried
    long wit = 0;
    for (std::size_t p = 1; p <= range; ++p)
        if (log2 + M.log_m(p) > M.log_m(std::size_t(opt.N_cap) * p) + kLogSlack) wit = long(p);
    rep.first_violation = {wit, opt.N_cap * wit};
    rep.notes.push_back("2 m_p <= m_{Np} fails past every admissible p0 for all N <= cap");
    return rep;
}

ConditionReport check_nu_M2_inequality(const WeightSequence& M, std::span<const double> t_grid,
                                       double H, double C0) {
    AssociatedFunction nu(M);
    ConditionReport rep;
    rep.condition = "nu-form (M.2)";
    rep.checked_range = long(t_grid.size());
    rep.constants["H"] = H;
    rep.constants["C0"] = C0;
    const double logC0 = std::log(C0);
    double worst = -std::numeric_limits<double>::infinity();
    long worst_i = 0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const double s = 2.0 * nu(t) - nu(H * t) - logC0;
        if (s > worst) {
            worst = s;
            worst_i = long(i);
        }
    }
    rep.max_slack = worst;
    rep.holds = worst <= 1e-9;
    if (!rep.holds) rep.first_violation = {worst_i, worst_i};
    return rep;
}

ConditionReport check_nu_doubling(const WeightSequence& M, std::span<const double> t_grid,
                                  const FitOptions& opt) {
    AssociatedFunction nu(M);
    std::vector<double> v1(t_grid.size()), v2(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        v1[i] = nu(t_grid[i]);
        v2[i] = nu(2.0 * t_grid[i]);
    }
    ConditionReport rep;
    rep.condition = "nu doubling";
    rep.checked_range = long(t_grid.size());
    for (double L = 1.0; L <= opt.cap; L += opt.step) {
        double need = 0.0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) need = std::max(need, v2[i] - L * v1[i]);
        if (need <= opt.log_C_cap) {
            rep.holds = true;
            rep.constants["L"] = L;
            rep.constants["C"] = std::exp(need);
            rep.max_slack = need;
            return rep;
        }
    }
    rep.holds = false;
    rep.notes.push_back("no L <= cap kept log C below the cap");
    return rep;
}

ConditionReport check_inclusion(const WeightSequence& M, const WeightSequence& N,
                                std::size_t range, const FitOptions& opt) {
    if (range > M.p_max() || range > N.p_max())
        throw PreconditionError("check_inclusion: range exceeds a table");
    ConditionReport rep;
    rep.condition = "inclusion M subset N";
    rep.checked_range = long(range);
    for (double L = 1.0; L <= opt.cap; L += opt.step) {
        const double logL = std::log(L);
        double need = 0.0;
        for (std::size_t p = 0; p <= range; ++p)
            need = std::max(need, M.log_M(p) - double(p) * logL - N.log_M(p));
        if (need <= opt.log_C_cap) {
            rep.holds = true;
            rep.constants["L"] = L;
            rep.constants["C"] = std::exp(need);
            // nu-form cross-check with the same constants
            AssociatedFunction nuM(M), nuN(N);
            double worst = 0.0;
            for (double t : log_grid(1e-2, 1e4, 200))
                worst = std::max(worst, nuN(t) - nuM(L * t) - need);
            rep.constants["nu_form_slack"] = worst;
            if (worst > 1e-9) {
                rep.notes.push_back("nu-form cross-check failed with the fitted constants");
                rep.holds = false;
            }
            return rep;
        }
    }
    rep.holds = false;
    // diagnose unbounded growth of (log M_p - log N_p)/p
    double g0 = (M.log_M(range / 2) - N.log_M(range / 2)) / double(range / 2);
    double g1 = (M.log_M(range) - N.log_M(range)) / double(range);
    rep.constants["tail_growth_mid"] = g0;
    rep.constants["tail_growth_end"] = g1;
    rep.notes.push_back(g1 > g0 + 1e-9 ? "(log M_p - log N_p)/p grows: no L can work"
                                       : "L search cap exceeded");
    return rep;
}

ConditionReport check_nontriviality(const WeightSequence& M, std::size_t range,
                                    double trend_factor) {
    if (range > M.p_max() || range < 8) throw PreconditionError("check_nontriviality: bad range");
    ConditionReport rep;
    rep.condition = "nontriviality m_p/log p -> inf";
    rep.checked_range = long(range);
    double min_ratio = std::numeric_limits<double>::infinity();
    std::size_t argmin = 2;
    for (std::size_t p = 2; p <= range; ++p) {
        const double ratio = std::exp(M.log_m(p)) / std::log(double(p));
        if (ratio < min_ratio) {
            min_ratio = ratio;
            argmin = p;
        }
    }
    const std::size_t mid = range / 2;
    const double ratio_mid = std::exp(M.log_m(mid)) / std::log(double(mid));
    const double ratio_end = std::exp(M.log_m(range)) / std::log(double(range));
    rep.constants["min_ratio"] = min_ratio;
    rep.constants["argmin_p"] = double(argmin);
    rep.constants["trend"] = ratio_end / ratio_mid;
    rep.holds = ratio_end >= trend_factor * ratio_mid;
    if (!rep.holds) rep.notes.push_back("tail ratio m_p/log p shows no growth trend");
    return rep;
}

// ---------------------------------------------------------------------------
// R-sequence constructions

MergeResult merge_rsequences(std::span<const RSequence> inputs, std::size_t j_max) {
    if (inputs.empty()) throw PreconditionError("merge_rsequences: empty input list");
    for (const auto& r : inputs)
        if (r.j_max() < j_max) throw PreconditionError("merge_rsequences: input shorter than j_max");
    // the countable family of the lemma is approximated by cycling the last input
    auto seq = [&](std::size_t l, std::size_t j) -> double {
        return inputs[std::min(l, inputs.size() - 1)][j];
    };
    // index ladder j_1 = 1 < j_2 < ... with
    //   seq(k+1)[j_{k+1}] >= seq(k)[j_k]  and  min_{l <= k+1} seq(l)[j_{k+1}] >= k+1
    std::vector<std::size_t> ladder{0, 1};  // ladder[k] = j_k (1-based k)
    for (std::size_t k = 1;; ++k) {
        const std::size_t jk = ladder[k];
        const double prev = seq(k, jk);
        std::size_t j = jk + 1;
        bool found = false;
        for (; j <= j_max; ++j) {
            if (seq(k + 1, j) < prev) continue;
            double mn = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l <= k + 1; ++l) mn = std::min(mn, seq(l, j));
            if (mn >= double(k + 1)) {
                found = true;
                break;
            }
        }
        if (!found) break;
        ladder.push_back(j);
        if (j == j_max) break;
    }
    std::vector<double> out(j_max + 1, 1.0);
    // out_j = min_{l <= k} seq(l)[j_k] on [j_k, j_{k+1}), k >= 2
    for (std::size_t k = 2; k < ladder.size(); ++k) {
        const std::size_t jk = ladder[k];
        const std::size_t jn = (k + 1 < ladder.size()) ? ladder[k + 1] : j_max + 1;
        double level = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l <= k; ++l) level = std::min(level, seq(l, jk));
        for (std::size_t j = jk; j < jn && j <= j_max; ++j) out[j] = level;
    }
    MergeResult res{RSequence::from_values(std::move(out)), {}};
    res.crossover.resize(inputs.size());
    for (std::size_t l = 0; l < inputs.size(); ++l) {
        std::optional<std::size_t> cross;
        for (std::size_t j = j_max + 1; j-- > 0;) {
            if (res.merged[j] > inputs[l][j] + kLogSlack) break;
            cross = j;
        }
        res.crossover[l] = cross;
    }
    return res;
}

ShrinkResult shrink_r(const WeightSequence& M, const RSequence& r) {
    if (r.j_max() < M.p_max()) throw PreconditionError("shrink_r: r shorter than the weight table");
    const std::size_t n = M.p_max();
    std::vector<double> log_rpp(n + 1, 0.0);  // log r''
    for (std::size_t j = 2; j <= n; ++j) {
        const double follow = log_rpp[j - 1] + M.log_m(j) - M.log_m(j - 1);
        log_rpp[j] = std::min(std::log(r[j]), follow);
    }
    std::vector<double> rpp(n + 1), rp(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        rpp[j] = std::exp(log_rpp[j]);
        rp[j] = std::exp(0.5 * log_rpp[j]);
    }
    std::vector<double> logN(n + 1, 0.0);
    double acc = 0.0;
    for (std::size_t p = 0; p <= n; ++p) {
        acc += 0.5 * log_rpp[p];
        logN[p] = M.log_M(p) - acc;
    }
    ConditionReport rep;
    rep.condition = "shrink_r assertions";
    rep.checked_range = long(n);
    rep.holds = true;
    for (std::size_t j = 0; j <= n; ++j) {
        if (rp[j] > r[j] * (1.0 + 1e-12)) {
            rep.holds = false;
            rep.first_violation = {long(j), long(j)};
            rep.notes.push_back("r' <= r failed");
            break;
        }
    }
    for (std::size_t p = 1; p < n && rep.holds; ++p) {
        if (2.0 * logN[p] > logN[p - 1] + logN[p + 1] + 1e-9) {
            rep.holds = false;
            rep.first_violation = {long(p), long(p)};
            rep.notes.push_back("log-convexity of N failed (table too short?)");
        }
    }
    ShrinkResult out{RSequence::from_values(std::move(rpp)), RSequence::from_values(std::move(rp)),
                     WeightSequence::from_log_table(std::move(logN)), std::move(rep)};
    return out;
}

KLemmaWitness klemma_convert(std::span<const double> a, KLemmaDirection direction,
                             std::optional<double> h_in) {
    if (a.empty()) throw PreconditionError("klemma_convert: empty sequence");
    std::vector<double> loga(a.size());
    for (std::size_t p = 0; p < a.size(); ++p) {
        if (!(a[p] > 0.0)) throw PreconditionError("klemma_convert: sequence must be positive");
        loga[p] = std::log(a[p]);
    }
    return klemma_convert_log(loga, direction, h_in);
}

KLemmaWitness klemma_convert_log(std::span<const double> log_a, KLemmaDirection direction,
                                 std::optional<double> h_in) {
    if (log_a.empty()) throw PreconditionError("klemma_convert: empty sequence");
    const std::size_t n = log_a.size() - 1;
    std::vector<double> loga(log_a.begin(), log_a.end());
    const std::size_t j_top = std::max<std::size_t>(n, 4);

    if (direction == KLemmaDirection::SomeH) {
        // h with sup a_p / h^p finite over the table: default to max a_p^{1/p}
        double h = h_in.value_or(0.0);
        if (!h_in) {
            h = 1.0;
            for (std::size_t p = 1; p <= n; ++p) h = std::max(h, std::exp(loga[p] / double(p)));
        }
        // staircase >= h from j = 2 on, stepping up at powers of two so r -> inf
        std::vector<double> rv(j_top + 1, 1.0);
        for (std::size_t j = 2; j <= j_top; ++j)
            rv[j] = h * std::max(1.0, std::floor(std::log2(double(j))));
        RSequence r = RSequence::from_values(std::move(rv));
        double sup = a[0];
        for (std::size_t p = 1; p <= n; ++p)
            sup = std::max(sup, std::exp(loga[p] - r.log_prefix_product(p)));
        return KLemmaWitness{std::move(r), h, sup,
                             "r_j = h * max(1, floor(log2 j)) for j beyond the table",
                             {}};
    }

    // AllH: increments of the greatest convex minorant of -log a_p, trimmed by
    // a fixed log h0 so the partial products stay below the minorant.
    const double h0 = h_in.value_or(2.0);
    const double log_h0 = std::log(h0);
    std::vector<double> c(n + 1);
    for (std::size_t p = 0; p <= n; ++p) c[p] = -loga[p] + loga[0];
    // lower convex hull of (p, c_p) via monotone chain
    std::vector<std::size_t> hull;
    for (std::size_t p = 0; p <= n; ++p) {
        while (hull.size() >= 2) {
            const std::size_t i = hull[hull.size() - 2], j = hull[hull.size() - 1];
            const double cross = (c[j] - c[i]) * double(p - i) - (c[p] - c[i]) * double(j - i);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    std::vector<double> minorant(n + 1, c[hull[0]]);
    for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
        const std::size_t i = hull[s], j = hull[s + 1];
        for (std::size_t p = i; p <= j; ++p)
            minorant[p] = c[i] + (c[j] - c[i]) * double(p - i) / double(j - i);
    }
    std::vector<double> rv(j_top + 1, 1.0);
    double prev = 1.0;
    for (std::size_t j = 2; j <= j_top; ++j) {
        const double inc = (j <= n) ? minorant[j] - minorant[j - 1]
                                    : minorant[n] - minorant[n - 1];
        const double rj = std::max(prev, std::max(1.0, std::exp(inc - log_h0)));
        rv[j] = rj;
        prev = rj;
    }
    RSequence r = RSequence::from_values(std::move(rv));
    double sup = a[0];
    for (std::size_t p = 1; p <= n; ++p)
        sup = std::max(sup, std::exp(loga[p] + r.log_prefix_product(p)));
    KLemmaWitness w{std::move(r), h0, sup,
                    "r_j = max(1, convex-minorant increment / h0), staircased, beyond the table",
                    {}};
    if (!w.r.diverged(8.0)) w.notes.push_back("witness staircase still low at the table end");
    return w;
}

}  // namespace carleman
