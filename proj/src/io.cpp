#include "pmcsens/io.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

namespace pmcsens {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what)
{
    throw Error(ErrorCode::SchemaError, (where.empty() ? std::string("/") : where) + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object())
        schema_error(where, "expected an object");
    for (const auto& item : obj.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            schema_error(where, "unknown field '" + item.key() + "'");
}

const json& required(const json& obj, const std::string& where, const std::string& key)
{
    auto it = obj.find(key);
    if (it == obj.end())
        schema_error(where, "missing field '" + key + "'");
    return *it;
}

Eigen::VectorXd read_vector(const json& node, const std::string& where)
{
    if (!node.is_array())
        schema_error(where, "expected an array of numbers");
    Eigen::VectorXd v(static_cast<Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].is_number())
            schema_error(where + "/" + std::to_string(i), "expected a number");
        v[static_cast<Index>(i)] = node[i].get<double>();
    }
    return v;
}

// 1-based state labels in the file, 0-based indices in memory.
std::vector<Index> read_states(const json& node, const std::string& where)
{
    if (!node.is_array())
        schema_error(where, "expected an array of state indices");
    std::vector<Index> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].is_number_integer() || node[i].get<long long>() < 1)
            schema_error(where + "/" + std::to_string(i), "expected a state index >= 1");
        out.push_back(static_cast<Index>(node[i].get<long long>() - 1));
    }
    return out;
}

nlohmann::ordered_json state_labels(const std::vector<Index>& states)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (Index s : states)
        out.push_back(s + 1);
    return out;
}

nlohmann::ordered_json vector_json(const Eigen::VectorXd& v)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

Direction read_direction(const json& node, const std::string& where)
{
    only_keys(node, where, {"weights"});
    const json& weights = required(node, where, "weights");
    if (!weights.is_object())
        schema_error(where + "/weights", "expected an object of parameter weights");
    Direction w;
    for (const auto& item : weights.items()) {
        if (!item.value().is_number())
            schema_error(where + "/weights/" + item.key(), "expected a number");
        w.weights[item.key()] = item.value().get<double>();
    }
    return w;
}

json parse_json(std::string_view text)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw Error(ErrorCode::SyntaxError,
                    "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what());
    }
}

} // namespace

ModelFile parse_model(std::string_view text)
{
    const json doc = parse_json(text);
    only_keys(doc, "", {"version", "states", "initial", "rows", "problem", "direction"});

    const json& version = required(doc, "", "version");
    if (!version.is_string() || version.get<std::string>() != kModelVersion)
        schema_error("/version", "expected \"" + std::string(kModelVersion) + "\"");

    const json& states = required(doc, "", "states");
    if (!states.is_number_integer() || states.get<long long>() < 1)
        schema_error("/states", "expected a positive integer");

    ModelFile model;
    Pmc& pmc = model.pmc;
    pmc.n = static_cast<Index>(states.get<long long>());
    pmc.initial = read_vector(required(doc, "", "initial"), "/initial");

    const json& rows = required(doc, "", "rows");
    if (!rows.is_array())
        schema_error("/rows", "expected an array with one entry per state");
    if (static_cast<Index>(rows.size()) != pmc.n)
        schema_error("/rows", "expected " + std::to_string(pmc.n) + " rows, found " + std::to_string(rows.size()));

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string where = "/rows/" + std::to_string(i);
        const json& row = rows[i];
        only_keys(row, where, {"concrete", "parameter", "support", "reference"});
        const bool concrete = row.contains("concrete");
        const bool parametric = row.contains("parameter") || row.contains("support") || row.contains("reference");
        if (concrete && parametric)
            schema_error(where, "a row is either concrete or a parameter, not both");
        if (concrete) {
            pmc.concrete_rows[static_cast<Index>(i)] = read_vector(row["concrete"], where + "/concrete");
            continue;
        }
        if (!parametric)
            schema_error(where, "expected 'concrete' or 'parameter'");
        DistributionParameter p;
        const json& id = required(row, where, "parameter");
        if (!id.is_string() || id.get<std::string>().empty())
            schema_error(where + "/parameter", "expected a non-empty parameter id");
        p.id = id.get<std::string>();
        p.row = static_cast<Index>(i);
        p.support = read_states(required(row, where, "support"), where + "/support");
        p.reference = read_vector(required(row, where, "reference"), where + "/reference");
        pmc.parameters.push_back(std::move(p));
    }

    if (doc.contains("problem")) {
        const json& node = doc["problem"];
        only_keys(node, "/problem", {"constraint", "destination"});
        model.problem = ReachabilityProblem{
            read_states(required(node, "/problem", "constraint"), "/problem/constraint"),
            read_states(required(node, "/problem", "destination"), "/problem/destination")};
    }
    if (doc.contains("direction"))
        model.direction = read_direction(doc["direction"], "/direction");

    const ValidationResult result = validate_pmc(pmc);
    if (!result.ok()) {
        std::ostringstream os;
        for (std::size_t k = 0; k < result.violations.size(); ++k) {
            const auto& v = result.violations[k];
            if (k)
                os << "; ";
            os << (v.row ? "/rows/" + std::to_string(*v.row) : std::string("/initial")) << ": "
               << to_string(v.code) << ": " << v.message;
        }
        throw Error(ErrorCode::ValidationError, os.str());
    }
    return model;
}

ModelFile load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::SyntaxError, "cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

Direction parse_direction(std::string_view text)
{
    return read_direction(parse_json(text), "");
}

std::string render_model(const ModelFile& model)
{
    const Pmc& pmc = model.pmc;
    nlohmann::ordered_json doc;
    doc["version"] = kModelVersion;
    doc["states"] = pmc.n;
    doc["initial"] = vector_json(pmc.initial);
    doc["rows"] = nlohmann::ordered_json::array();
    for (Index i = 0; i < pmc.n; ++i) {
        nlohmann::ordered_json row;
        if (auto it = pmc.concrete_rows.find(i); it != pmc.concrete_rows.end()) {
            row["concrete"] = vector_json(it->second);
        } else {
            for (const auto& p : pmc.parameters)
                if (p.row == i) {
                    row["parameter"] = p.id;
                    row["support"] = state_labels(p.support);
                    row["reference"] = vector_json(p.reference);
                }
        }
        doc["rows"].push_back(row);
    }
    if (model.problem) {
        doc["problem"]["constraint"] = state_labels(model.problem->constraint);
        doc["problem"]["destination"] = state_labels(model.problem->destination);
    }
    if (model.direction) {
        doc["direction"]["weights"] = nlohmann::ordered_json::object();
        for (const auto& [id, w] : model.direction->weights)
            doc["direction"]["weights"][id] = w;
    }
    return doc.dump(2) + "\n";
}

std::string model_hash(const Pmc& pmc)
{
    const std::string text = render_model(ModelFile{pmc, std::nullopt, std::nullopt});
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << hash;
    return os.str();
}

} // namespace pmcsens
