#include "pmcsens/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace pmcsens {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::RowNotStochastic: return "RowNotStochastic";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DuplicateParameterId: return "DuplicateParameterId";
    case ErrorCode::RowMissing: return "RowMissing";
    case ErrorCode::RowConflict: return "RowConflict";
    case ErrorCode::InvalidSupport: return "InvalidSupport";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptyDestination: return "EmptyDestination";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::DirectionMismatch: return "DirectionMismatch";
    case ErrorCode::WeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::NonpositiveDelta: return "NonpositiveDelta";
    case ErrorCode::SimplexViolation: return "SimplexViolation";
    case ErrorCode::BadIndices: return "BadIndices";
    case ErrorCode::InfeasibleDistance: return "InfeasibleDistance";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

const DistributionParameter* Pmc::find_parameter(std::string_view id) const
{
    auto it = std::find_if(parameters.begin(), parameters.end(),
                           [&](const DistributionParameter& p) { return p.id == id; });
    return it == parameters.end() ? nullptr : &*it;
}

std::vector<std::string> Pmc::parameter_ids() const
{
    std::vector<std::string> ids;
    ids.reserve(parameters.size());
    for (const auto& p : parameters)
        ids.push_back(p.id);
    return ids;
}

Assignment Assignment::with(const std::string& id, Eigen::VectorXd value) const
{
    Assignment copy = *this;
    copy.values[id] = std::move(value);
    return copy;
}

bool is_probability_vector(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    if (v.size() == 0 || !v.allFinite())
        return false;
    return v.minCoeff() >= 0.0 && std::abs(v.sum() - 1.0) <= kStochasticTolerance;
}

std::string ValidationResult::summary() const
{
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i)
            os << "; ";
        os << to_string(violations[i].code) << ": " << violations[i].message;
    }
    return os.str();
}

namespace {

std::string row_label(Index row) { return "row " + std::to_string(row + 1); }

// Appends NegativeEntry / RowNotStochastic violations for a distribution-like vector.
void check_distribution(const Eigen::VectorXd& v, std::optional<Index> row, const std::string& what,
                        std::vector<Violation>& out)
{
    bool negative = false;
    for (Index j = 0; j < v.size(); ++j) {
        if (!std::isfinite(v[j]) || v[j] < 0.0) {
            out.push_back({ErrorCode::NegativeEntry, row, j,
                           what + " entry " + std::to_string(j + 1) + " is negative or non-finite"});
            negative = true;
        }
    }
    if (!negative && std::abs(v.sum() - 1.0) > kStochasticTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << what << " sums to " << v.sum();
        out.push_back({ErrorCode::RowNotStochastic, row, std::nullopt, os.str()});
    }
}

} // namespace

ValidationResult validate_pmc(const Pmc& pmc)
{
    ValidationResult result;
    auto& out = result.violations;

    if (pmc.n <= 0) {
        out.push_back({ErrorCode::RowMissing, std::nullopt, std::nullopt, "model has no states"});
        return result;
    }
    if (pmc.initial.size() != pmc.n)
        out.push_back({ErrorCode::ArityMismatch, std::nullopt, std::nullopt,
                       "initial distribution has length " + std::to_string(pmc.initial.size()) +
                           ", expected " + std::to_string(pmc.n)});
    else
        check_distribution(pmc.initial, std::nullopt, "initial distribution", out);

    std::vector<int> owners(static_cast<std::size_t>(pmc.n), 0);
    for (const auto& [row, values] : pmc.concrete_rows) {
        if (row < 0 || row >= pmc.n) {
            out.push_back({ErrorCode::IndexOutOfRange, std::nullopt, std::nullopt,
                           "concrete " + row_label(row) + " outside 1.." + std::to_string(pmc.n)});
            continue;
        }
        ++owners[static_cast<std::size_t>(row)];
        if (values.size() != pmc.n) {
            out.push_back({ErrorCode::ArityMismatch, row, std::nullopt,
                           row_label(row) + " has length " + std::to_string(values.size()) +
                               ", expected " + std::to_string(pmc.n)});
            continue;
        }
        check_distribution(values, row, row_label(row), out);
    }

    std::set<std::string> ids;
    for (const auto& p : pmc.parameters) {
        const std::string what = "parameter '" + p.id + "'";
        if (!ids.insert(p.id).second)
            out.push_back({ErrorCode::DuplicateParameterId, p.row, std::nullopt,
                           what + " is declared more than once"});
        if (p.row < 0 || p.row >= pmc.n) {
            out.push_back({ErrorCode::IndexOutOfRange, std::nullopt, std::nullopt,
                           what + " sits on " + row_label(p.row) + " outside 1.." +
                               std::to_string(pmc.n)});
            continue;
        }
        ++owners[static_cast<std::size_t>(p.row)];

        bool support_ok = !p.support.empty();
        for (std::size_t j = 0; j < p.support.size() && support_ok; ++j) {
            if (p.support[j] < 0 || p.support[j] >= pmc.n)
                support_ok = false;
            if (j > 0 && p.support[j] <= p.support[j - 1])
                support_ok = false;
        }
        if (!support_ok)
            out.push_back({ErrorCode::InvalidSupport, p.row, std::nullopt,
                           what + " support must be non-empty, strictly increasing and within 1.." +
                               std::to_string(pmc.n)});
        if (p.reference.size() != p.arity()) {
            out.push_back({ErrorCode::ArityMismatch, p.row, std::nullopt,
                           what + " reference has length " + std::to_string(p.reference.size()) +
                               " but support has " + std::to_string(p.arity()) + " columns"});
            continue;
        }
        check_distribution(p.reference, p.row, what + " reference on " + row_label(p.row), out);
    }

    for (Index row = 0; row < pmc.n; ++row) {
        const int count = owners[static_cast<std::size_t>(row)];
        if (count == 0)
            out.push_back({ErrorCode::RowMissing, row, std::nullopt, row_label(row) + " is undefined"});
        else if (count > 1)
            out.push_back({ErrorCode::RowConflict, row, std::nullopt,
                           row_label(row) + " is defined " + std::to_string(count) + " times"});
    }
    return result;
}

void require_valid(const Pmc& pmc)
{
    const auto result = validate_pmc(pmc);
    if (!result.ok())
        throw Error(ErrorCode::ValidationError, result.summary());
}

Assignment references(const Pmc& pmc)
{
    Assignment a;
    for (const auto& p : pmc.parameters)
        a.values.emplace(p.id, p.reference);
    return a;
}

void validate_assignment(const Pmc& pmc, const Assignment& a)
{
    for (const auto& p : pmc.parameters) {
        auto it = a.values.find(p.id);
        if (it == a.values.end())
            throw Error(ErrorCode::MissingParameter, "no value for parameter '" + p.id + "'");
        if (it->second.size() != p.arity())
            throw Error(ErrorCode::ArityMismatch,
                        "parameter '" + p.id + "' expects " + std::to_string(p.arity()) +
                            " entries, got " + std::to_string(it->second.size()));
        if (!is_probability_vector(it->second))
            throw Error(ErrorCode::SimplexViolation,
                        "value for parameter '" + p.id + "' is not a probability vector");
    }
    for (const auto& [id, value] : a.values)
        if (!pmc.find_parameter(id))
            throw Error(ErrorCode::UnknownParameter, "assignment names unknown parameter '" + id + "'");
}

ConcreteChain instantiate(const Pmc& pmc, const Assignment& a)
{
    validate_assignment(pmc, a);
    ConcreteChain chain;
    chain.initial = pmc.initial;
    chain.transition = Eigen::MatrixXd::Zero(pmc.n, pmc.n);
    for (const auto& [row, values] : pmc.concrete_rows)
        chain.transition.row(row) = values.transpose();
    for (const auto& p : pmc.parameters) {
        const Eigen::VectorXd& v = a.values.at(p.id);
        for (Index j = 0; j < p.arity(); ++j)
            chain.transition(p.row, p.support[static_cast<std::size_t>(j)]) = v[j];
    }
    return chain;
}

std::pair<Pmc, ReachabilityProblem> build_frog()
{
    Pmc pmc;
    pmc.n = 4;
    pmc.initial = Eigen::Vector4d::Constant(0.25);

    DistributionParameter z;
    z.id = "z";
    z.row = 0;
    z.support = {0, 1, 2, 3};
    z.reference = Eigen::Vector4d(0.375, 0.125, 0.25, 0.25);
    pmc.parameters.push_back(std::move(z));

    pmc.concrete_rows[1] = Eigen::Vector4d(3.0 / 8.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 4.0);
    pmc.concrete_rows[2] = Eigen::Vector4d(0.0, 0.5, 0.5, 0.0);
    pmc.concrete_rows[3] = Eigen::Vector4d(1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0);

    return {std::move(pmc), ReachabilityProblem{{0, 1}, {3}}};
}

std::pair<Pmc, ReachabilityProblem> build_zeroconf(double collision, double loss_ref)
{
    if (!(collision > 0.0 && collision < 1.0))
        throw Error(ErrorCode::DomainError, "collision probability must lie in (0,1)");
    if (!(loss_ref > 0.0 && loss_ref < 1.0))
        throw Error(ErrorCode::DomainError, "loss reference must lie in (0,1)");

    constexpr Index n = 7;
    Pmc pmc;
    pmc.n = n;
    pmc.initial = Eigen::VectorXd::Zero(n);
    pmc.initial[0] = 1.0;

    Eigen::VectorXd start = Eigen::VectorXd::Zero(n);
    start[1] = collision;
    start[6] = 1.0 - collision;
    pmc.concrete_rows[0] = start;

    // Probe i (1..4) on row i: back to the start state or forward one probe.
    for (Index i = 1; i <= 4; ++i) {
        DistributionParameter x;
        x.id = "x" + std::to_string(i);
        x.row = i;
        x.support = {0, i + 1};
        x.reference = Eigen::Vector2d(1.0 - loss_ref, loss_ref);
        pmc.parameters.push_back(std::move(x));
    }

    pmc.concrete_rows[5] = Eigen::VectorXd::Unit(n, 5);
    pmc.concrete_rows[6] = Eigen::VectorXd::Unit(n, 6);

    return {std::move(pmc), ReachabilityProblem{{0, 1, 2, 3, 4}, {6}}};
}

} // namespace pmcsens
