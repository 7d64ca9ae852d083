#include "pmcsens/sampler.hpp"

#include "random_models.hpp"

#include <catch_amalgamated.hpp>

using namespace pmcsens;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs)
{
    Eigen::VectorXd v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs)
        v[i++] = x;
    return v;
}

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::SyntaxError;
}

bool on_simplex(const Eigen::VectorXd& v)
{
    return v.minCoeff() >= 0.0 && std::abs(v.sum() - 1.0) <= 1e-12;
}

const Eigen::VectorXd frog_ref = (Eigen::VectorXd(4) << 0.375, 0.125, 0.25, 0.25).finished();

Assignment zeroconf_at(const Pmc& pmc, double x)
{
    Assignment a;
    for (const auto& p : pmc.parameters)
        a.values[p.id] = vec({x, 1.0 - x});
    return a;
}

} // namespace

TEST_CASE("extremal perturbation", "[sampler]")
{
    const Eigen::VectorXd v = extremal_perturbation(frog_ref, 0.004, 3, 2);
    CHECK((v - vec({0.375, 0.125, 0.248, 0.252})).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THAT(absolute_distance(v, frog_ref), WithinAbs(0.004, 1e-15));
    CHECK((extremal_perturbation(vec({0.5, 0.5}), 0.2, 0, 1) - vec({0.6, 0.4})).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK(code_of([] { extremal_perturbation(frog_ref, 0.0, 3, 2); }) == ErrorCode::NonpositiveDelta);
    CHECK(code_of([] { extremal_perturbation(frog_ref, 0.004, 2, 2); }) == ErrorCode::BadIndices);
    CHECK(code_of([] { extremal_perturbation(frog_ref, 0.004, 4, 2); }) == ErrorCode::BadIndices);
    CHECK(code_of([] { extremal_perturbation(frog_ref, 0.3, 0, 1); }) == ErrorCode::SimplexViolation);
    CHECK(code_of([] { extremal_perturbation(vec({0.9, 0.1}), 0.4, 0, 1); }) == ErrorCode::SimplexViolation);
}

TEST_CASE("simplex samples stay on the simplex within the distance", "[sampler][property]")
{
    for (std::uint64_t i = 0; i < 10000; ++i) {
        Rng rng = sample_rng(42, i);
        const Eigen::VectorXd v = sample_on_simplex(frog_ref, 0.004, rng);
        CHECK(on_simplex(v));
        const double d = absolute_distance(v, frog_ref);
        CHECK(d > 0.0);
        CHECK(d <= 0.004 * (1 + 1e-12));
    }
}

TEST_CASE("simplex samples hit the distance exactly away from the boundary", "[sampler][property]")
{
    std::mt19937_64 gen(3);
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const Eigen::VectorXd r = testing::random_distribution(gen, 2 + testing::pick(gen, 6), 0.2);
        Rng rng = sample_rng(1, i);
        const Eigen::VectorXd v = sample_on_simplex(r, 0.01, rng);
        CHECK(on_simplex(v));
        CHECK_THAT(absolute_distance(v, r), WithinAbs(0.01, 1e-14));
    }
}

TEST_CASE("simplex samples clip near the boundary", "[sampler]")
{
    const Eigen::VectorXd r = vec({0.98, 0.01, 0.01});
    for (std::uint64_t i = 0; i < 500; ++i) {
        Rng rng = sample_rng(9, i);
        const Eigen::VectorXd v = sample_on_simplex(r, 1.5, rng);
        CHECK(on_simplex(v));
        CHECK(absolute_distance(v, r) <= 1.5 + 1e-12);
    }
    Rng rng = sample_rng(0, 0);
    CHECK(code_of([&] { sample_on_simplex(r, 2.5, rng); }) == ErrorCode::InfeasibleDistance);
    CHECK(code_of([&] { sample_on_simplex(r, 0.0, rng); }) == ErrorCode::NonpositiveDelta);
    CHECK(code_of([&] { sample_on_simplex(vec({1.0}), 0.1, rng); }) == ErrorCode::InfeasibleDistance);
}

TEST_CASE("simplex samples are deterministic and shrink to the reference", "[sampler]")
{
    Rng a = sample_rng(42, 7), b = sample_rng(42, 7), c = sample_rng(43, 7);
    const Eigen::VectorXd va = sample_on_simplex(frog_ref, 0.004, a);
    CHECK(va == sample_on_simplex(frog_ref, 0.004, b));
    CHECK(va != sample_on_simplex(frog_ref, 0.004, c));

    for (double delta : {1e-2, 1e-5, 1e-9}) {
        Rng r = sample_rng(5, 0);
        CHECK((sample_on_simplex(frog_ref, delta, r) - frog_ref).cwiseAbs().maxCoeff() <= delta);
    }
}

TEST_CASE("empirical condition number of the frog", "[sampler]")
{
    const auto [pmc, problem] = build_frog();
    const CanonicalProblem cp = canonicalize(pmc, problem);
    CHECK(empirical_kappa(pmc, cp, 1e-4, 0, 1) >= 0.99 * 0.3125);
    CHECK(empirical_kappa(pmc, cp, 1e-4, 100, 1) <= 1.01 * 0.3125 + 1e-9);
    const double wide = empirical_kappa(pmc, cp, 0.004, 10000, 42, std::nullopt, 4);
    CHECK(wide <= 0.3125 * 1.05);
    CHECK(wide >= 0.99 * 0.3125);
    CHECK(code_of([&] { empirical_kappa(pmc, cp, 0.0, 1, 1); }) == ErrorCode::NonpositiveDelta);
}

TEST_CASE("empirical condition number with all coefficients zero", "[sampler]")
{
    const auto [pmc, problem] = build_frog();
    const CanonicalProblem cp = canonicalize(pmc, {{1}, {3}});
    CHECK(empirical_kappa(pmc, cp, 1e-4, 50, 1) == 0.0);
}

TEST_CASE("zeroconf assignments from the experiment", "[sampler]")
{
    const auto [pmc, problem] = build_zeroconf();
    const CanonicalProblem cp = canonicalize(pmc, problem);
    const ValidationReport r =
        validate_assignments(pmc, cp, {zeroconf_at(pmc, 0.749), zeroconf_at(pmc, 0.752), zeroconf_at(pmc, 0.747)});
    REQUIRE(r.samples.size() == 3);

    const double exact[] = {-0.015688e-3, 0.030818e-3, -0.047630e-3};
    const double bound[] = {0.0155945e-3, 0.0311891e-3, 0.0467836e-3};
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK_THAT(r.samples[k].exact, WithinAbs(exact[k], 1e-9));
        CHECK_THAT(r.samples[k].bound, WithinAbs(bound[k], 1e-10));
        CHECK_THAT(r.samples[k].distance, WithinAbs(0.002 * (k + 1) * 4, 1e-12));
        CHECK_THAT(r.samples[k].distances.at("x1"), WithinAbs(0.002 * (k + 1), 1e-15));
    }
    CHECK(r.samples[2].violation);
    CHECK_FALSE(r.samples[1].violation);
    CHECK_FALSE(r.samples[2].beyond_slack);
}

TEST_CASE("frog assignments from the experiment", "[sampler]")
{
    const auto [pmc, problem] = build_frog();
    const CanonicalProblem cp = canonicalize(pmc, problem);
    const std::vector<Eigen::VectorXd> models = {
        vec({0.374, 0.124, 0.251, 0.251}), vec({0.374, 0.124, 0.250, 0.252}), vec({0.377, 0.125, 0.248, 0.250}),
        vec({0.377, 0.125, 0.250, 0.248}), vec({0.375, 0.125, 0.248, 0.252}), vec({0.375, 0.125, 0.252, 0.248})};
    const double exact[] = {0.0, 0.623e-3, 0.627e-3, -0.627e-3, 1.250e-3, -1.250e-3};
    std::vector<Assignment> assignments;
    for (const auto& v : models)
        assignments.push_back(references(pmc).with("z", v));
    const ValidationReport r = validate_assignments(pmc, cp, assignments);
    for (std::size_t k = 0; k < models.size(); ++k) {
        CHECK_THAT(r.samples[k].exact, WithinAbs(exact[k], 0.5e-6));
        CHECK_THAT(r.samples[k].bound, WithinAbs(1.250e-3, 0.5e-6));
        CHECK(std::abs(r.samples[k].exact) <= r.samples[k].bound + 1e-9);
    }
}

TEST_CASE("validate_bounds in the asymptotic regime", "[sampler][property]")
{
    const auto [pmc, problem] = build_zeroconf();
    const CanonicalProblem cp = canonicalize(pmc, problem);
    std::map<std::string, double> deltas;
    for (const auto& id : pmc.parameter_ids())
        deltas[id] = 1e-6;
    const ValidationReport r = validate_bounds(pmc, cp, deltas, 200, 42);
    CHECK(r.samples.size() == 200);
    // Two-entry parameters only move along their extremal direction, so the
    // worse sign still pokes out by a second-order amount.
    CHECK(r.beyond_slack == 0);
    for (const auto& s : r.samples)
        CHECK(std::abs(s.exact) <= s.bound * (1 + 1e-4));
    CHECK(r.empirical_kappa <= r.kappa_sum * (1 + r.slack));

    const auto [frog, frog_problem] = build_frog();
    const ValidationReport f = validate_bounds(frog, canonicalize(frog, frog_problem), {{"z", 1e-7}}, 500, 42);
    CHECK(f.beyond_slack == 0);
    CHECK(f.max_violation <= 1e-12);

    CHECK(code_of([&] { validate_bounds(pmc, cp, {{"y", 1e-3}}, 1, 1); }) == ErrorCode::UnknownParameter);
    CHECK(code_of([&] { validate_bounds(pmc, cp, {{"x1", 0.0}}, 1, 1); }) == ErrorCode::NonpositiveDelta);
}

TEST_CASE("validation reports are reproducible and thread independent", "[sampler][property]")
{
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 10; ++trial) {
        testing::RandomPmcOptions o;
        o.parameters = 1 + testing::pick(gen, 3);
        const auto c = testing::random_case(gen, o);
        const CanonicalProblem cp = canonicalize(c.pmc, c.problem);
        std::map<std::string, double> deltas;
        for (const auto& id : c.pmc.parameter_ids())
            deltas[id] = 1e-3 * (1 + testing::unit(gen));

        ValidationOptions serial, parallel;
        parallel.threads = 4;
        const ValidationReport a = validate_bounds(c.pmc, cp, deltas, 300, 7, serial);
        const ValidationReport b = validate_bounds(c.pmc, cp, deltas, 300, 7, parallel);
        REQUIRE(a.samples.size() == b.samples.size());
        CHECK(a.empirical_kappa == b.empirical_kappa);
        CHECK(a.violations == b.violations);
        for (std::size_t k = 0; k < a.samples.size(); ++k) {
            const auto& s = a.samples[k];
            CHECK(s.exact == b.samples[k].exact);
            CHECK(s.assignment.values == b.samples[k].assignment.values);
            CHECK(std::abs(s.linear) <= s.bound + 1e-15);
            double total = 0.0;
            for (const auto& p : c.pmc.parameters) {
                const auto& v = s.assignment.values.at(p.id);
                CHECK(on_simplex(v));
                CHECK(s.distances.at(p.id) == absolute_distance(v, p.reference));
                total += s.distances.at(p.id);
            }
            CHECK_THAT(s.distance, WithinAbs(total, 1e-15));
        }
    }
}

TEST_CASE("empirical condition number sandwich on single-parameter chains", "[sampler][property]")
{
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 30; ++trial) {
        testing::RandomPmcOptions o;
        o.parameters = 1;
        o.mixed_support = true;
        const auto c = testing::random_case(gen, o);
        const CanonicalProblem cp = canonicalize(c.pmc, c.problem);
        const double kappa = condition_number_basic(gradient_coefficients(c.pmc, cp).parameters[0].h);
        const double empirical = empirical_kappa(c.pmc, cp, 1e-4, 200, static_cast<std::uint64_t>(trial));
        CHECK(empirical >= 0.99 * kappa);
        CHECK(empirical <= 1.01 * kappa + 1e-9);
    }
}
