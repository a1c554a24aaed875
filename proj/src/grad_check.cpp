#include "strokegen/grad_check.hpp"

#include <cmath>
#include <map>

namespace strokegen {

GradCheckReport grad_check(ParamStore& store, const std::function<double()>& loss,
                           const std::function<void()>& compute_grads, double h,
                           double tolerance) {
    compute_grads();
    std::map<std::string, Tensor> analytic;
    for (const auto& name : store.names()) analytic.emplace(name, store.entry(name).grad);

    GradCheckReport report;
    report.tolerance = tolerance;
    for (const auto& name : store.names()) {
        Tensor& value = store.value(name);
        const Tensor& a = analytic.at(name);
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double saved = value.data[i];
            value.data[i] = saved + h;
            const double lp = loss();
            value.data[i] = saved - h;
            const double lm = loss();
            value.data[i] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double denom =
                std::max({1.0, std::fabs(a.data[i]), std::fabs(numeric)});
            const double err = std::fabs(a.data[i] - numeric) / denom;
            ++report.coords_checked;
            if (err > report.max_rel_error) {
                report.max_rel_error = err;
                report.worst_param = name;
                report.worst_index = i;
            }
        }
    }
    report.pass = report.max_rel_error < tolerance;
    return report;
}

}  // namespace strokegen
