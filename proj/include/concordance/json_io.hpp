#pragma once

#include "concordance/attainability.hpp"
#include "concordance/elliptical.hpp"
#include "concordance/equiconcordant.hpp"
#include "concordance/estimation.hpp"
#include "concordance/sampler.hpp"

#include <json.hpp>

#include <string_view>

namespace concordance {

using json = nlohmann::json;

/// "0.25", "-5/12", "1e-3". Fractions are divided once, after exact integer parsing.
double parse_number(std::string_view text);
/// Comma-separated numbers, fractions allowed.
std::vector<double> parse_number_list(std::string_view text);
/// Number or string holding a number or fraction.
double number_from_json(const json& j);

json to_json(const SubsetIndex& s);
SubsetIndex subset_from_json(int d, const json& j);

/// {"d", "labels", "values"}
json to_json(const EvenSignature& kappa);
json to_json(const FullSignature& kappa);
json to_json(const PartialSignature& partial);
/// Accepts {"d","labels","values"[,"kind":"kappa"|"tau"]} or {"d","pairs":[...][,"kind"]}.
/// Tau values are converted with the cardinality of their label.
PartialSignature partial_from_json(const json& j);
/// Requires every even label exactly once; labels may be omitted when values follow graded order.
EvenSignature even_signature_from_json(const json& j);

/// {"d", "w"}
json to_json(const MixtureWeights& w);
MixtureWeights weights_from_json(const json& j);

json to_json(const FeasibilityCertificate& c);
/// {"targets","lower","upper"} plus "vertices" when given.
json to_json(const BoundsReport& b, const std::vector<std::vector<double>>* vertices = nullptr);
json to_json(const WeightPolytope& p);

/// {"d", "k"}
json to_json(const SkeletalSignature& s);
SkeletalSignature skeletal_from_json(const json& j);
/// {"d", "v", "raw", "attainable"}
json to_json(const SkeletalSolution& s, int d);

/// Signature, weights, "n", "tie_adjusted".
json to_json(const EmpiricalSignature& e, int n);

/// 2-D array, or {"d","rho":[pairs]}.
CorrelationMatrix correlation_from_json(const json& j);
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);
/// Rectangular array of rows with equal length.
Eigen::MatrixXd rows_from_json(const json& j);

/// Signature, projected signature, weights, "std_errors", "method", "samples".
json to_json(const EllipticalSignature& s);
json to_json(const TLimitWeights& t);
json to_json(const EllipticalVerdict& v);

json to_json(const DiagnosticReport& r);

/// McConfig fields from {"samples","seed","antithetic","threads"}; missing keys keep the defaults given.
McConfig mc_from_json(const json& j, McConfig defaults = {});

}  // namespace concordance
