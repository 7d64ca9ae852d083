#ifndef PMCSENS_IO_HPP
#define PMCSENS_IO_HPP

#include "pmcsens/model.hpp"
#include "pmcsens/perturbation.hpp"
#include "pmcsens/sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace pmcsens {

inline constexpr std::string_view kModelVersion = "pmcsens-model/1";

/// Contents of a `.model` file: one PMC with an optional problem and direction.
struct ModelFile {
    Pmc pmc;
    std::optional<ReachabilityProblem> problem;
    std::optional<Direction> direction;
};

/// Parses and validates a model. Errors carry a line/column (SyntaxError) or a
/// JSON pointer to the offending field (SchemaError, ValidationError).
ModelFile parse_model(std::string_view text);
ModelFile load_model(const std::filesystem::path& path);
std::string render_model(const ModelFile& model);

/// Parses a standalone direction document `{"weights": {...}}`.
Direction parse_direction(std::string_view text);

/// 64-bit FNV-1a of the rendered model, as 16 hex digits.
std::string model_hash(const Pmc& pmc);

using Record = nlohmann::ordered_json;

Record check_record(const Pmc& pmc, const ReachabilityProblem& problem, double probability);
Record sensitivity_record(const Pmc& pmc, const SensitivityReport& report);
Record validation_record(const Pmc& pmc, const ReachabilityProblem& problem, const ValidationReport& report);
/// Both experiment tables, rebuilt from the bundled example models.
Record paper_tables_record(const SolveMethod& method = DirectSolve{});

/// Human-readable rendering of any record produced above.
std::string render_table(const Record& record, bool color = false);

} // namespace pmcsens

#endif // PMCSENS_IO_HPP
