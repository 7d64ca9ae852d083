#include "pmcsens/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>

namespace pmcsens {

namespace {

using json = Record;

constexpr const char* kConvention =
    "kappa_i are parameter-wise condition numbers; kappa_sum = sum_i kappa_i; "
    "kappa_w = sum_i w(i) kappa_i; the predicted range for distances delta_i is "
    "+/- sum_i kappa_i delta_i";

json states_json(const std::vector<Index>& states)
{
    json out = json::array();
    for (Index s : states)
        out.push_back(s + 1);
    return out;
}

json problem_json(const ReachabilityProblem& problem)
{
    Record out;
    out["constraint"] = states_json(problem.constraint);
    out["destination"] = states_json(problem.destination);
    return out;
}

json vec_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

Record sample_json(const PerturbationSample& s)
{
    Record out;
    Record assignment;
    for (const auto& [id, v] : s.assignment.values)
        assignment[id] = vec_json(v);
    out["assignment"] = assignment;
    Record distances;
    for (const auto& [id, d] : s.distances)
        distances[id] = d;
    out["distances"] = distances;
    out["distance"] = s.distance;
    out["exact"] = s.exact;
    out["linear"] = s.linear;
    out["bound"] = s.bound;
    out["violation"] = s.violation;
    out["beyond_slack"] = s.beyond_slack;
    return out;
}

// Number of code points, which equals the display width for the text we print.
std::size_t display_width(const std::string& s)
{
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<bool> highlight;

    void add(std::vector<std::string> row, bool flagged = false)
    {
        rows.push_back(std::move(row));
        highlight.push_back(flagged);
    }

    std::string render(bool color) const
    {
        std::vector<std::size_t> width(header.size(), 0);
        for (std::size_t c = 0; c < header.size(); ++c)
            width[c] = display_width(header[c]);
        for (const auto& row : rows)
            for (std::size_t c = 0; c < row.size(); ++c)
                width[c] = std::max(width[c], display_width(row[c]));

        auto line = [&](const std::vector<std::string>& cells) {
            std::string out;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                out += cells[c];
                if (c + 1 < cells.size())
                    out += std::string(width[c] - display_width(cells[c]) + 2, ' ');
            }
            return out + "\n";
        };
        std::string out = color ? "\033[1m" + line(header) + "\033[0m" : line(header);
        for (std::size_t r = 0; r < rows.size(); ++r)
            out += color && highlight[r] ? "\033[31m" + line(rows[r]) + "\033[0m" : line(rows[r]);
        return out;
    }
};

std::string sig6(double v) { return fmt::format("{:#.6g}", v); }

std::string problem_text(const json& problem)
{
    auto set = [](const json& states) {
        std::string out = "{";
        for (std::size_t i = 0; i < states.size(); ++i)
            out += (i ? "," : "") + std::to_string(states[i].get<long long>());
        return out + "}";
    };
    return set(problem["constraint"]) + " U " + set(problem["destination"]);
}

std::string vector_text(const json& v, const std::function<std::string(double)>& format)
{
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + format(v[i].get<double>());
    return out + ")";
}

std::string render_check(const Record& r)
{
    return fmt::format("problem      {}\nprobability  {}\n", problem_text(r["problem"]),
                       sig6(r["probability"].get<double>()));
}

std::string render_sensitivity(const Record& r, bool color)
{
    std::string out = fmt::format("model        {}\nproblem      {}\nprobability  {}\n\n", r["model_hash"].get<std::string>(),
                                  problem_text(r["problem"]), sig6(r["probability"].get<double>()));
    Table t{{"parameter", "row", "h", "kappa_i", "w(i)"}, {}, {}};
    for (const auto& p : r["parameters"])
        t.add({p["id"].get<std::string>(), std::to_string(p["row"].get<long long>()), vector_text(p["h"], sig6),
               sig6(p["kappa"].get<double>()), sig6(p["weight"].get<double>())});
    out += t.render(color);
    out += fmt::format("\nkappa_w      {}\nkappa_sum    {}\n", sig6(r["kappa_w"].get<double>()),
                       sig6(r["kappa_sum"].get<double>()));
    return out;
}

std::string render_validation(const Record& r, bool color)
{
    std::string out = fmt::format(
        "problem          {}\nseed             {}\nsamples          {}\nkappa_sum        {}\n"
        "kappa_w          {}\nempirical kappa  {}\nviolations       {} ({} beyond {}% slack)\nmax violation    {}\n",
        problem_text(r["problem"]), r["seed"].get<std::uint64_t>(), r["samples"].size(), sig6(r["kappa_sum"].get<double>()),
        sig6(r["kappa_w"].get<double>()), sig6(r["empirical_kappa"].get<double>()), r["violations"].get<std::size_t>(),
        r["beyond_slack"].get<std::size_t>(), fmt::format("{:g}", r["slack"].get<double>() * 100.0),
        sig6(r["max_violation"].get<double>()));

    // Worst samples first, relative to their bound.
    std::vector<std::size_t> order(r["samples"].size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    auto excess = [&](std::size_t i) {
        const auto& s = r["samples"][i];
        return std::abs(s["exact"].get<double>()) - s["bound"].get<double>();
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return excess(a) > excess(b); });
    order.resize(std::min<std::size_t>(order.size(), 10));

    Table t{{"sample", "distance", "exact", "linear", "bound", "violation"}, {}, {}};
    for (std::size_t i : order) {
        const auto& s = r["samples"][i];
        t.add({std::to_string(i), sig6(s["distance"].get<double>()), sig6(s["exact"].get<double>()),
               sig6(s["linear"].get<double>()), "±" + sig6(s["bound"].get<double>()),
               s["violation"].get<bool>() ? "yes" : "no"},
              s["violation"].get<bool>());
    }
    return out + "\n" + t.render(color);
}

std::string milli(double v) { return fmt::format("{:.3f}", v * 1e3); }
std::string milli_signed(double v) { return fmt::format("{:+.3f}", v * 1e3); }

std::string render_paper_tables(const Record& r, bool color)
{
    std::string out;
    for (const auto& table : r["tables"]) {
        out += fmt::format("{} (x 1e-3), problem {}\n", table["title"].get<std::string>(),
                           problem_text(table["problem"]));
        Table t{{"Model", table["value_label"].get<std::string>(), "Probability", "Distance", "Condition Number",
                 "Variation Range", "Linear Estimate", "Exceeds Range"},
                {},
                {}};
        for (const auto& row : table["rows"]) {
            const bool reference = row["model"] == "PMC";
            const auto values = vector_text(row["value"], [](double v) { return fmt::format("{:.0f}", v * 1e3); });
            const bool flagged = !reference && row["violation"].get<bool>();
            if (reference)
                t.add({"PMC", values, milli(row["probability"].get<double>()), "-",
                       milli(row["kappa_sum"].get<double>()), "-", "-", "-"});
            else
                t.add({row["model"].get<std::string>(), values, milli_signed(row["exact"].get<double>()),
                       milli(row["distance"].get<double>()), "-", "±" + milli(row["bound"].get<double>()),
                       milli_signed(row["linear"].get<double>()), flagged ? "yes" : "no"},
                      flagged);
        }
        out += t.render(color) + "\n";
    }
    return out;
}

Record experiment_table(const std::string& name, const std::string& title, const std::string& value_label,
                   const Pmc& pmc, const ReachabilityProblem& problem,
                   const std::vector<std::pair<std::string, Assignment>>& models, const SolveMethod& method)
{
    const CanonicalProblem cp = canonicalize(pmc, problem);
    const SensitivityReport sens = analyze_sensitivity(pmc, problem, std::nullopt, method);
    std::vector<Assignment> assignments;
    for (const auto& m : models)
        assignments.push_back(m.second);
    ValidationOptions options;
    options.method = method;
    const ValidationReport report = validate_assignments(pmc, cp, assignments, options);

    // The first parameter stands for all of them: every row moves identically.
    const std::string& lead = pmc.parameters.front().id;
    Record table;
    table["name"] = name;
    table["title"] = title;
    table["value_label"] = value_label;
    table["problem"] = problem_json(problem);
    json rows = json::array();
    Record ref;
    ref["model"] = "PMC";
    ref["value"] = vec_json(pmc.parameters.front().reference);
    ref["probability"] = sens.probability;
    ref["kappa_sum"] = sens.kappa_sum;
    rows.push_back(ref);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& s = report.samples[i];
        Record row;
        row["model"] = models[i].first;
        row["value"] = vec_json(s.assignment.values.at(lead));
        row["exact"] = s.exact;
        row["distance"] = s.distances.at(lead);
        row["total_distance"] = s.distance;
        row["bound"] = s.bound;
        row["linear"] = s.linear;
        row["violation"] = s.violation;
        rows.push_back(row);
    }
    table["rows"] = rows;
    return table;
}

} // namespace

Record check_record(const Pmc& pmc, const ReachabilityProblem& problem, double probability)
{
    Record r;
    r["kind"] = "check";
    r["model_hash"] = model_hash(pmc);
    r["problem"] = problem_json(problem);
    r["probability"] = probability;
    return r;
}

Record sensitivity_record(const Pmc& pmc, const SensitivityReport& report)
{
    Record r;
    r["kind"] = "sensitivity";
    r["model_hash"] = report.model_hash.empty() ? model_hash(pmc) : report.model_hash;
    r["problem"] = problem_json(report.problem);
    r["probability"] = report.probability;
    json params = json::array();
    for (std::size_t k = 0; k < pmc.parameters.size(); ++k) {
        const auto& p = pmc.parameters[k];
        Record entry;
        entry["id"] = p.id;
        entry["row"] = p.row + 1;
        entry["support"] = states_json(p.support);
        entry["reference"] = vec_json(p.reference);
        entry["h"] = vec_json(report.gradients.parameters[k].h);
        entry["kappa"] = report.kappa[k];
        entry["weight"] = report.direction.weights.at(p.id);
        params.push_back(entry);
    }
    r["parameters"] = params;
    r["kappa_w"] = report.kappa_w;
    r["kappa_sum"] = report.kappa_sum;
    r["constraint_order"] = states_json(report.problem.constraint);
    r["s"] = vec_json(report.gradients.s);
    r["t"] = vec_json(report.gradients.t);
    r["convention"] = kConvention;
    return r;
}

Record validation_record(const Pmc& pmc, const ReachabilityProblem& problem, const ValidationReport& report)
{
    Record r;
    r["kind"] = "validation";
    r["model_hash"] = model_hash(pmc);
    r["problem"] = problem_json(problem);
    r["seed"] = report.seed;
    r["slack"] = report.slack;
    r["kappa_sum"] = report.kappa_sum;
    r["kappa_w"] = report.kappa_w;
    r["empirical_kappa"] = report.empirical_kappa;
    r["violations"] = report.violations;
    r["beyond_slack"] = report.beyond_slack;
    r["max_violation"] = report.max_violation;
    json samples = json::array();
    for (const auto& s : report.samples)
        samples.push_back(sample_json(s));
    r["samples"] = samples;
    r["convention"] = kConvention;
    return r;
}

Record paper_tables_record(const SolveMethod& method)
{
    Record r;
    r["kind"] = "paper-tables";
    r["scale"] = 1e-3;
    json tables = json::array();

    {
        const auto [pmc, problem] = build_zeroconf(0.2, 0.25);
        std::vector<std::pair<std::string, Assignment>> models;
        const double xs[] = {0.749, 0.752, 0.747};
        for (std::size_t i = 0; i < 3; ++i) {
            Assignment a;
            for (const auto& p : pmc.parameters)
                a.values[p.id] = Eigen::Vector2d(xs[i], 1.0 - xs[i]);
            models.emplace_back("M" + std::to_string(i + 1), a);
        }
        tables.push_back(experiment_table("zeroconf", "Noisy Zeroconf", "x_i", pmc, problem, models, method));
    }
    {
        const auto [pmc, problem] = build_frog();
        const double dists[][4] = {{374, 124, 251, 251}, {374, 124, 250, 252}, {377, 125, 248, 250},
                                   {377, 125, 250, 248}, {375, 125, 248, 252}, {375, 125, 252, 248}};
        std::vector<std::pair<std::string, Assignment>> models;
        for (std::size_t i = 0; i < 6; ++i) {
            Assignment a;
            a.values["z"] = Eigen::Vector4d(dists[i][0], dists[i][1], dists[i][2], dists[i][3]) / 1000.0;
            models.emplace_back("M" + std::to_string(i + 1), a);
        }
        tables.push_back(experiment_table("frog", "Hopping frog", "Distribution", pmc, problem, models, method));
    }
    r["tables"] = tables;
    return r;
}

std::string render_table(const Record& record, bool color)
{
    const std::string kind = record.value("kind", "");
    if (kind == "check")
        return render_check(record);
    if (kind == "sensitivity")
        return render_sensitivity(record, color);
    if (kind == "validation")
        return render_validation(record, color);
    if (kind == "paper-tables")
        return render_paper_tables(record, color);
    throw Error(ErrorCode::SchemaError, "cannot render record of kind '" + kind + "'");
}

} // namespace pmcsens
