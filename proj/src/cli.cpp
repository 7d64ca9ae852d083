#include "pmcsens/cli.hpp"

#include "pmcsens/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace pmcsens {

namespace {

struct Options {
    std::string model;
    std::string format = "table";
    std::vector<long long> constraint;
    std::vector<long long> destination;
    std::string method = "direct";
    long truncation = 100;
    std::string direction;
    double delta = 0.0;
    std::vector<double> per_parameter;
    std::size_t samples = 1000;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    double slack = 0.05;
};

void add_output_options(CLI::App& cmd, Options& o)
{
    cmd.add_option("--format", o.format, "Output rendering")->check(CLI::IsMember({"json", "table"}));
}

void add_solver_options(CLI::App& cmd, Options& o)
{
    cmd.add_option("--method", o.method, "Reachability solver")->check(CLI::IsMember({"direct", "series"}));
    cmd.add_option("--truncation", o.truncation, "Highest power kept by the series solver")->check(CLI::PositiveNumber);
}

void add_model_options(CLI::App& cmd, Options& o)
{
    cmd.add_option("model", o.model, "Model file (.model)")->required();
    cmd.add_option("--constraint", o.constraint, "Constraint states, 1-based, comma separated")->delimiter(',');
    cmd.add_option("--destination", o.destination, "Destination states, 1-based, comma separated")->delimiter(',');
    add_output_options(cmd, o);
}

SolveMethod solve_method(const Options& o)
{
    if (o.method == "series")
        return SeriesSolve{o.truncation};
    return DirectSolve{};
}

std::vector<Index> to_states(const std::vector<long long>& labels)
{
    std::vector<Index> out;
    for (long long s : labels) {
        if (s < 1)
            throw Error(ErrorCode::IndexOutOfRange, "state labels start at 1");
        out.push_back(static_cast<Index>(s - 1));
    }
    return out;
}

// Flags win over the problem stored in the model file.
ReachabilityProblem resolve_problem(const ModelFile& model, const Options& o)
{
    ReachabilityProblem problem = model.problem.value_or(ReachabilityProblem{});
    if (!model.problem && o.destination.empty())
        throw Error(ErrorCode::EmptyDestination, "model has no problem; pass --constraint and --destination");
    if (!o.constraint.empty() || !o.destination.empty()) {
        problem.constraint = to_states(o.constraint);
        if (!o.destination.empty())
            problem.destination = to_states(o.destination);
    }
    return problem;
}

std::optional<Direction> resolve_direction(const ModelFile& model, const Options& o)
{
    if (o.direction.empty())
        return model.direction;
    if (o.direction == "uniform")
        return Direction::uniform(model.pmc.parameter_ids());
    std::ifstream in(o.direction);
    if (!in)
        throw Error(ErrorCode::SyntaxError, "cannot read direction file " + o.direction);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_direction(text.str());
}

void emit(const Record& record, const Options& o, std::ostream& out, bool color)
{
    if (o.format == "json")
        out << record.dump(2) << "\n";
    else
        out << render_table(record, color);
}

int run_check(const Options& o, std::ostream& out, bool color)
{
    const ModelFile model = load_model(o.model);
    const ReachabilityProblem problem = resolve_problem(model, o);
    const CanonicalProblem cp = canonicalize(model.pmc, problem);
    const double p = referential_probability(model.pmc, cp, solve_method(o));
    emit(check_record(model.pmc, {cp.constraint_states(), cp.destination_states()}, p), o, out, color);
    return kExitOk;
}

int run_sensitivity(const Options& o, std::ostream& out, bool color)
{
    const ModelFile model = load_model(o.model);
    const ReachabilityProblem problem = resolve_problem(model, o);
    SensitivityReport report =
        analyze_sensitivity(model.pmc, problem, resolve_direction(model, o), solve_method(o));
    report.model_hash = model_hash(model.pmc);
    emit(sensitivity_record(model.pmc, report), o, out, color);
    return kExitOk;
}

int run_validate(const Options& o, std::ostream& out, bool color)
{
    const ModelFile model = load_model(o.model);
    const ReachabilityProblem problem = resolve_problem(model, o);
    const CanonicalProblem cp = canonicalize(model.pmc, problem);
    const auto ids = model.pmc.parameter_ids();

    std::map<std::string, double> deltas;
    if (!o.per_parameter.empty()) {
        if (o.per_parameter.size() != ids.size())
            throw Error(ErrorCode::DirectionMismatch, "--per-parameter needs " + std::to_string(ids.size()) +
                                                          " distances, one per parameter in file order");
        for (std::size_t i = 0; i < ids.size(); ++i)
            deltas[ids[i]] = o.per_parameter[i];
    } else {
        if (!(o.delta > 0.0))
            throw Error(ErrorCode::NonpositiveDelta, "pass --delta > 0 or --per-parameter");
        const Direction w = resolve_direction(model, o).value_or(Direction::uniform(ids));
        validate_direction(w, ids);
        for (const auto& [id, weight] : w.weights)
            if (weight > 0.0)
                deltas[id] = weight * o.delta;
    }

    ValidationOptions options;
    options.slack = o.slack;
    options.threads = o.threads;
    options.method = solve_method(o);
    const ValidationReport report = validate_bounds(model.pmc, cp, deltas, o.samples, o.seed, options);
    emit(validation_record(model.pmc, {cp.constraint_states(), cp.destination_states()}, report), o, out, color);
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color)
{
    CLI::App app{"Condition numbers of constrained reachability in parametric Markov chains", "pmcsens"};
    app.require_subcommand(1);
    Options o;

    auto* check = app.add_subcommand("check", "Referential reachability probability");
    add_model_options(*check, o);
    add_solver_options(*check, o);

    auto* sensitivity = app.add_subcommand("sensitivity", "Linear coefficients and condition numbers");
    add_model_options(*sensitivity, o);
    add_solver_options(*sensitivity, o);
    sensitivity->add_option("--direction", o.direction, "'uniform' or a file with {\"weights\": {...}}");

    auto* validate = app.add_subcommand("validate", "Compare exact perturbations with the predicted range");
    add_model_options(*validate, o);
    add_solver_options(*validate, o);
    validate->add_option("--delta", o.delta, "Total distance, split across parameters by the direction");
    validate->add_option("--per-parameter", o.per_parameter, "Distance per parameter, in file order")->delimiter(',');
    validate->add_option("--samples", o.samples, "Number of random perturbations");
    validate->add_option("--seed", o.seed, "Seed of the sample generator");
    validate->add_option("--direction", o.direction, "'uniform' or a file with {\"weights\": {...}}");
    validate->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    validate->add_option("--slack", o.slack, "Relative excess tolerated before a violation counts as severe")
        ->check(CLI::NonNegativeNumber);

    auto* tables = app.add_subcommand("paper-tables", "Rebuild the Zeroconf and hopping frog experiment tables");
    add_output_options(*tables, o);
    add_solver_options(*tables, o);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (check->parsed())
            return run_check(o, out, color);
        if (sensitivity->parsed())
            return run_sensitivity(o, out, color);
        if (validate->parsed())
            return run_validate(o, out, color);
        emit(paper_tables_record(solve_method(o)), o, out, color);
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_numerical_failure(e.code()) ? kExitNumericalFailure : kExitInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
}

} // namespace pmcsens
