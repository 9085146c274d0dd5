#include "json_detail.hpp"

#include <string>

namespace rmlab::detail {

namespace {

[[noreturn]] void fail(const char* what, const std::string& msg) {
  throw ConfigError(std::string(what) + ": " + msg);
}

double as_number(const nlohmann::json& j, const char* key, const char* what) {
  if (!j.is_number()) fail(what, std::string("field '") + key + "' must be a number");
  return j.get<double>();
}

std::size_t as_count(const nlohmann::json& j, const char* key,
                     const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    fail(what, std::string("field '") + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(j.get<unsigned long long>());
}

}  // namespace

nlohmann::json parse_json(const std::string& text, const char* what) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr,
                                           /*allow_exceptions=*/false);
  if (j.is_discarded()) fail(what, "malformed JSON");
  if (!j.is_object()) fail(what, "expected a JSON object");
  return j;
}

EntryDistribution distribution_from_json_obj(const nlohmann::json& j) {
  const char* what = "distribution";
  if (!j.contains("kind") || !j["kind"].is_string()) {
    fail(what, "missing string field 'kind'");
  }
  EntryDistribution d;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "Gaussian") {
    d.kind = DistributionKind::Gaussian;
  } else if (kind == "Rademacher") {
    d.kind = DistributionKind::Rademacher;
  } else if (kind == "SparseSign") {
    d.kind = DistributionKind::SparseSign;
  } else if (kind == "SymmetricPareto") {
    d.kind = DistributionKind::SymmetricPareto;
  } else if (kind == "ScaledStudentT") {
    d.kind = DistributionKind::ScaledStudentT;
  } else if (kind == "BoundedUniform") {
    d.kind = DistributionKind::BoundedUniform;
  } else {
    fail(what, "unknown kind '" + kind + "'");
  }

  if (j.contains("normalization")) {
    if (!j["normalization"].is_string()) {
      fail(what, "field 'normalization' must be a string");
    }
    const std::string mode = j["normalization"].get<std::string>();
    if (mode == "none") {
      d.normalization = NormalizationMode::None;
    } else if (mode == "unit_variance") {
      d.normalization = NormalizationMode::UnitVariance;
    } else if (mode == "moment4eps") {
      d.normalization = NormalizationMode::Moment4PlusEps;
    } else {
      fail(what, "unknown normalization '" + mode + "'");
    }
  }

  if (j.contains("params")) {
    const auto& params = j["params"];
    if (!params.is_object()) fail(what, "field 'params' must be an object");
    for (auto it = params.begin(); it != params.end(); ++it) {
      const std::string& key = it.key();
      if (key == "p") {
        d.p = as_number(it.value(), "p", what);
      } else if (key == "alpha") {
        d.alpha = as_number(it.value(), "alpha", what);
      } else if (key == "scale") {
        d.pareto_scale = as_number(it.value(), "scale", what);
      } else if (key == "nu") {
        d.nu = as_number(it.value(), "nu", what);
      } else if (key == "half_width") {
        d.half_width = as_number(it.value(), "half_width", what);
      } else if (key == "eps") {
        d.eps = as_number(it.value(), "eps", what);
      } else {
        fail(what, "unknown param '" + key + "'");
      }
    }
  }

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "kind" && key != "normalization" && key != "params") {
      fail(what, "unknown field '" + key + "'");
    }
  }

  validate(d);
  return d;
}

nlohmann::json distribution_to_json_obj(const EntryDistribution& d) {
  nlohmann::json params = nlohmann::json::object();
  switch (d.kind) {
    case DistributionKind::Gaussian:
    case DistributionKind::Rademacher:
      break;
    case DistributionKind::SparseSign:
      params["p"] = d.p;
      break;
    case DistributionKind::SymmetricPareto:
      params["alpha"] = d.alpha;
      params["scale"] = d.pareto_scale;
      break;
    case DistributionKind::ScaledStudentT:
      params["nu"] = d.nu;
      break;
    case DistributionKind::BoundedUniform:
      params["half_width"] = d.half_width;
      break;
  }
  if (d.normalization == NormalizationMode::Moment4PlusEps) {
    params["eps"] = d.eps;
  }
  nlohmann::json j;
  j["kind"] = kind_name(d.kind);
  j["normalization"] = normalization_name(d.normalization);
  j["params"] = params;
  return j;
}

BFactorSpec b_factor_from_json_obj(const nlohmann::json& j) {
  const char* what = "b_factor";
  if (!j.contains("kind") || !j["kind"].is_string()) {
    fail(what, "missing string field 'kind'");
  }
  BFactorSpec spec;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "Identity") {
    spec.kind = BFactorKind::Identity;
  } else if (kind == "OrthogonalProjection") {
    spec.kind = BFactorKind::OrthogonalProjection;
  } else if (kind == "RowSelection") {
    spec.kind = BFactorKind::RowSelection;
  } else if (kind == "DiagonalColumnNorms") {
    spec.kind = BFactorKind::DiagonalColumnNorms;
  } else if (kind == "ScaledRandomOrthonormalRows") {
    spec.kind = BFactorKind::ScaledRandomOrthonormalRows;
  } else {
    fail(what, "unknown kind '" + kind + "'");
  }

  if (j.contains("n")) spec.n = as_count(j["n"], "n", what);
  if (j.contains("N")) spec.N = as_count(j["N"], "N", what);

  if (j.contains("params")) {
    const auto& params = j["params"];
    if (!params.is_object()) fail(what, "field 'params' must be an object");
    for (auto it = params.begin(); it != params.end(); ++it) {
      const std::string& key = it.key();
      const auto& value = it.value();
      if (key == "rank") {
        spec.rank = as_count(value, "rank", what);
      } else if (key == "norm_value") {
        spec.norm_value = as_number(value, "norm_value", what);
      } else if (key == "scale") {
        spec.scale = as_number(value, "scale", what);
      } else if (key == "norms") {
        if (!value.is_array()) fail(what, "param 'norms' must be an array");
        spec.norms.clear();
        for (const auto& entry : value) {
          spec.norms.push_back(as_number(entry, "norms", what));
        }
      } else if (key == "indices") {
        if (!value.is_array()) fail(what, "param 'indices' must be an array");
        spec.indices.clear();
        for (const auto& entry : value) {
          spec.indices.push_back(as_count(entry, "indices", what));
        }
      } else {
        fail(what, "unknown param '" + key + "'");
      }
    }
  }

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "kind" && key != "n" && key != "N" && key != "params") {
      fail(what, "unknown field '" + key + "'");
    }
  }

  return spec;
}

nlohmann::json b_factor_to_json_obj(const BFactorSpec& spec) {
  nlohmann::json params = nlohmann::json::object();
  switch (spec.kind) {
    case BFactorKind::Identity:
      break;
    case BFactorKind::OrthogonalProjection:
      params["rank"] = spec.rank;
      break;
    case BFactorKind::RowSelection:
      if (!spec.indices.empty()) params["indices"] = spec.indices;
      break;
    case BFactorKind::DiagonalColumnNorms:
      if (!spec.norms.empty()) params["norms"] = spec.norms;
      if (spec.norm_value >= 0.0) params["norm_value"] = spec.norm_value;
      break;
    case BFactorKind::ScaledRandomOrthonormalRows:
      params["scale"] = spec.scale;
      break;
  }
  nlohmann::json j;
  j["kind"] = kind_name(spec.kind);
  j["n"] = spec.n;
  j["N"] = spec.N;
  j["params"] = params;
  return j;
}

}  // namespace rmlab::detail
