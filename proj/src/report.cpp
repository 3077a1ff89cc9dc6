#include "carleman/report.hpp"

#include <cmath>

#include "json.hpp"

namespace carleman {

std::string ConditionReport::to_json() const {
    nlohmann::json j;
    j["condition"] = condition;
    j["holds"] = holds;
    j["constants"] = constants;
    j["checked_range"] = checked_range;
    if (first_violation)
        j["first_violation"] = {first_violation->first, first_violation->second};
    else
        j["first_violation"] = nullptr;
    j["max_slack"] = max_slack;
    j["notes"] = notes;
    return j.dump(2);
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * double(i) / double(n - 1));
    return g;
}

}  // namespace carleman
