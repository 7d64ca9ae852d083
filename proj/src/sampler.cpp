#include "pmcsens/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace pmcsens {

namespace {

// Runs fn(i) for i in [0, count); each index is handled exactly once.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads)
                    fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// Caches the reference solution so each sample costs a single solve.
class Evaluator {
public:
    Evaluator(const Pmc& pmc, const CanonicalProblem& cp, SolveMethod method)
        : pmc_(pmc), cp_(cp), method_(method), iota_(constraint_initial(pmc.initial, cp)),
          reference_(solve_reachability(extract_system(pmc, cp), method))
    {
    }

    double rho(const Assignment& a) const
    {
        const LinearSystem sys = concrete_system(instantiate(pmc_, a), cp_);
        return iota_.dot(solve_reachability(sys, method_) - reference_);
    }

private:
    const Pmc& pmc_;
    const CanonicalProblem& cp_;
    SolveMethod method_;
    Eigen::VectorXd iota_;
    Eigen::VectorXd reference_;
};

PerturbationSample make_sample(const Evaluator& eval, const GradientSet& g, Assignment a, double slack)
{
    PerturbationSample s;
    for (const auto& p : g.parameters) {
        const double d = absolute_distance(a.values.at(p.id), p.reference);
        s.distances[p.id] = d;
        s.distance += d;
        s.bound += condition_number_basic(p.h) * d;
    }
    s.exact = eval.rho(a);
    s.linear = linear_estimate(g, a);
    s.violation = std::abs(s.exact) > s.bound + 1e-15;
    s.beyond_slack = std::abs(s.exact) > s.bound * (1.0 + slack) + 1e-15;
    s.assignment = std::move(a);
    return s;
}

ValidationReport summarize(std::vector<PerturbationSample> samples, const GradientSet& g, double slack)
{
    ValidationReport report;
    report.slack = slack;
    std::map<std::string, double> total;
    for (const auto& s : samples) {
        if (s.violation) {
            ++report.violations;
            report.max_violation = std::max(report.max_violation, std::abs(s.exact) - s.bound);
        }
        if (s.beyond_slack)
            ++report.beyond_slack;
        if (s.distance > 0.0)
            report.empirical_kappa = std::max(report.empirical_kappa, std::abs(s.exact) / s.distance);
        for (const auto& [id, d] : s.distances)
            total[id] += d;
    }
    for (const auto& p : g.parameters)
        report.kappa_sum += condition_number_basic(p.h);
    double sum = 0.0;
    for (const auto& [id, d] : total)
        sum += d;
    if (sum > 0.0)
        for (const auto& p : g.parameters)
            report.kappa_w += condition_number_basic(p.h) * total[p.id] / sum;
    report.samples = std::move(samples);
    return report;
}

} // namespace

Rng sample_rng(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::VectorXd extremal_perturbation(const Eigen::VectorXd& r, double delta, Index up, Index down)
{
    if (up == down || up < 0 || down < 0 || up >= r.size() || down >= r.size())
        throw Error(ErrorCode::BadIndices, "extremal direction needs two distinct indices within the vector");
    if (!(delta > 0.0))
        throw Error(ErrorCode::NonpositiveDelta, "perturbation distance must be positive");
    const double half = 0.5 * delta;
    if (r[up] + half > 1.0 + kStochasticTolerance || r[down] - half < -kStochasticTolerance)
        throw Error(ErrorCode::SimplexViolation, "extremal perturbation leaves the simplex");
    Eigen::VectorXd v = r;
    v[up] = std::min(1.0, r[up] + half);
    v[down] = std::max(0.0, r[down] - half);
    return v;
}

Eigen::VectorXd sample_on_simplex(const Eigen::VectorXd& r, double delta, Rng& rng)
{
    if (!(delta > 0.0))
        throw Error(ErrorCode::NonpositiveDelta, "perturbation distance must be positive");
    if (delta > 2.0)
        throw Error(ErrorCode::InfeasibleDistance, "total variation distance cannot exceed 2");
    const Index k = r.size();
    if (k < 2)
        throw Error(ErrorCode::InfeasibleDistance, "a distribution with one entry cannot be perturbed");

    std::vector<bool> raise(static_cast<std::size_t>(k));
    for (Index j = 0; j < k; ++j)
        raise[static_cast<std::size_t>(j)] = uniform01(rng) < 0.5;
    const auto raised = std::count(raise.begin(), raise.end(), true);
    if (raised == 0 || raised == k) {
        const auto j = static_cast<std::size_t>(std::min<Index>(k - 1, static_cast<Index>(uniform01(rng) * k)));
        raise[j] = !raise[j];
    }
    double lowerable = 0.0;
    for (Index j = 0; j < k; ++j)
        if (!raise[static_cast<std::size_t>(j)])
            lowerable += r[j];
    if (lowerable <= 0.0)
        raise.flip();

    Eigen::VectorXd weight(k);
    for (Index j = 0; j < k; ++j)
        weight[j] = 1.0 - uniform01(rng);

    // Water-fill delta/2 over the lowering side.
    Eigen::VectorXd v = r;
    std::vector<Index> active;
    for (Index j = 0; j < k; ++j)
        if (!raise[static_cast<std::size_t>(j)])
            active.push_back(j);
    double remaining = 0.5 * delta;
    double removed = 0.0;
    while (!active.empty() && remaining > 0.0) {
        double wsum = 0.0;
        for (Index j : active)
            wsum += weight[j];
        const double budget = remaining;
        std::vector<Index> next;
        bool saturated = false;
        for (Index j : active)
            if (budget * weight[j] / wsum >= v[j]) {
                remaining -= v[j];
                removed += v[j];
                v[j] = 0.0;
                saturated = true;
            } else {
                next.push_back(j);
            }
        if (!saturated) {
            for (Index j : active) {
                const double share = budget * weight[j] / wsum;
                v[j] -= share;
                removed += share;
            }
            remaining = 0.0;
        }
        active = std::move(next);
    }

    double wsum = 0.0;
    for (Index j = 0; j < k; ++j)
        if (raise[static_cast<std::size_t>(j)])
            wsum += weight[j];
    for (Index j = 0; j < k; ++j)
        if (raise[static_cast<std::size_t>(j)])
            v[j] += removed * weight[j] / wsum;
    return v;
}

PerturbationSample evaluate_assignment(const Pmc& pmc, const CanonicalProblem& cp, const GradientSet& g,
                                       const Assignment& a, const ValidationOptions& options)
{
    const Evaluator eval(pmc, cp, options.method);
    return make_sample(eval, g, a, options.slack);
}

ValidationReport validate_assignments(const Pmc& pmc, const CanonicalProblem& cp,
                                      const std::vector<Assignment>& assignments,
                                      const ValidationOptions& options)
{
    const GradientSet g = gradient_coefficients(pmc, cp);
    const Evaluator eval(pmc, cp, options.method);
    std::vector<PerturbationSample> samples(assignments.size());
    parallel_for(assignments.size(), options.threads,
                 [&](std::size_t i) { samples[i] = make_sample(eval, g, assignments[i], options.slack); });
    return summarize(std::move(samples), g, options.slack);
}

ValidationReport validate_bounds(const Pmc& pmc, const CanonicalProblem& cp,
                                 const std::map<std::string, double>& deltas, std::size_t samples,
                                 std::uint64_t seed, const ValidationOptions& options)
{
    for (const auto& [id, d] : deltas) {
        if (!pmc.find_parameter(id))
            throw Error(ErrorCode::UnknownParameter, "no parameter '" + id + "'");
        if (!(d > 0.0))
            throw Error(ErrorCode::NonpositiveDelta, "distance for '" + id + "' must be positive");
    }
    const GradientSet g = gradient_coefficients(pmc, cp);
    const Evaluator eval(pmc, cp, options.method);
    const Assignment base = references(pmc);

    std::vector<PerturbationSample> out(samples);
    parallel_for(samples, options.threads, [&](std::size_t i) {
        Rng rng = sample_rng(seed, i);
        Assignment a = base;
        for (const auto& p : pmc.parameters) {
            auto it = deltas.find(p.id);
            if (it != deltas.end() && p.arity() >= 2)
                a.values[p.id] = sample_on_simplex(p.reference, it->second, rng);
        }
        out[i] = make_sample(eval, g, std::move(a), options.slack);
    });
    ValidationReport report = summarize(std::move(out), g, options.slack);
    report.seed = seed;
    return report;
}

double empirical_kappa(const Pmc& pmc, const CanonicalProblem& cp, double delta, std::size_t samples,
                       std::uint64_t seed, const std::optional<Direction>& direction, unsigned threads)
{
    if (!(delta > 0.0))
        throw Error(ErrorCode::NonpositiveDelta, "perturbation distance must be positive");
    const auto ids = pmc.parameter_ids();
    const Direction w = direction ? *direction : Direction::uniform(ids);
    validate_direction(w, ids);

    const GradientSet g = gradient_coefficients(pmc, cp);
    const Evaluator eval(pmc, cp, DirectSolve{});
    const Assignment base = references(pmc);

    auto ratio = [&](const Assignment& a) {
        double distance = 0.0;
        for (const auto& p : pmc.parameters)
            distance += absolute_distance(a.values.at(p.id), p.reference);
        return distance > 0.0 ? std::abs(eval.rho(a)) / distance : 0.0;
    };

    std::vector<double> ratios(samples + 2, 0.0);
    parallel_for(samples, threads, [&](std::size_t i) {
        Rng rng = sample_rng(seed, i);
        Assignment a = base;
        for (const auto& p : pmc.parameters) {
            const double share = w.weights.at(p.id) * delta;
            if (share > 0.0 && p.arity() >= 2)
                a.values[p.id] = sample_on_simplex(p.reference, share, rng);
        }
        ratios[i] = ratio(a);
    });

    for (int sign = 0; sign < 2; ++sign) {
        Assignment a = base;
        for (std::size_t k = 0; k < pmc.parameters.size(); ++k) {
            const auto& p = pmc.parameters[k];
            const auto& h = g.parameters[k].h;
            const double share = w.weights.at(p.id) * delta;
            if (share <= 0.0 || condition_number_basic(h) <= 0.0)
                continue;
            const auto [up, down] = extremal_indices(h);
            try {
                a.values[p.id] = sign == 0 ? extremal_perturbation(p.reference, share, up, down)
                                           : extremal_perturbation(p.reference, share, down, up);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SimplexViolation)
                    throw;
            }
        }
        ratios[samples + static_cast<std::size_t>(sign)] = ratio(a);
    }
    return *std::max_element(ratios.begin(), ratios.end());
}

} // namespace pmcsens
