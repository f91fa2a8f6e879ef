#pragma once

// JSON round-trip for assemblies; strategies are written (not read) for reports.
//
//   {"dim": 2, "settings": [{"labels": [1, -1, null], "effects": [[[re, im], ...], ...]}]}
//
// Each effect is a list of rows, each row a list of [re, im] pairs. A null label is the no-click outcome.

#include "gjm/povm.hpp"
#include "gjm/strategies.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gjm {

using json = nlohmann::json;

class JsonFormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline json matrix_to_json(const CplxMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CplxMat matrix_from_json(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw JsonFormatError("effect: expected " + std::to_string(dim) + " rows");
  CplxMat m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) throw JsonFormatError("effect: ragged row");
    for (int c = 0; c < dim; ++c) {
      const auto& z = row[static_cast<std::size_t>(c)];
      if (z.is_number()) {
        m(r, c) = cplx(z.get<double>(), 0.0);
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(r, c) = cplx(z[0].get<double>(), z[1].get<double>());
      } else {
        throw JsonFormatError("effect: entries must be [re, im] pairs");
      }
    }
  }
  return m;
}

inline json label_to_json(const Label& l) { return l.is_none() ? json(nullptr) : json(l.value()); }

inline Label label_from_json(const json& j) {
  if (j.is_null()) return kNoClick;
  if (j.is_number_integer()) return Label::of(j.get<int>());
  throw JsonFormatError("label: expected an integer or null");
}

inline json assembly_to_json(const Assembly& a) {
  json settings = json::array();
  for (const auto& p : a.povms()) {
    json labels = json::array();
    json effects = json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
      labels.push_back(label_to_json(p.labels()[i]));
      effects.push_back(matrix_to_json(p.effect(i).mat()));
    }
    settings.push_back({{"labels", labels}, {"effects", effects}});
  }
  return {{"dim", a.dim()}, {"settings", settings}};
}

inline Assembly assembly_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("dim") || !j.contains("settings")) {
      throw JsonFormatError("assembly: need fields dim and settings");
    }
    const int dim = j.at("dim").get<int>();
    if (dim < 1) throw JsonFormatError("assembly: dim must be positive");
    std::vector<Povm> povms;
    for (const auto& s : j.at("settings")) {
      const auto& lj = s.at("labels");
      const auto& ej = s.at("effects");
      if (lj.size() != ej.size()) throw JsonFormatError("assembly: labels and effects differ in length");
      std::vector<Label> labels;
      std::vector<HermMat> effects;
      for (std::size_t i = 0; i < lj.size(); ++i) {
        labels.push_back(label_from_json(lj[i]));
        const CplxMat m = matrix_from_json(ej[i], dim);
        if (max_abs(m - m.adjoint()) > 1e-10) throw JsonFormatError("assembly: effect is not Hermitian");
        effects.emplace_back(m);
      }
      povms.emplace_back(std::move(labels), std::move(effects));
    }
    if (povms.empty()) throw JsonFormatError("assembly: no settings");
    return Assembly(std::move(povms));
  } catch (const json::exception& e) {
    throw JsonFormatError(std::string("assembly: ") + e.what());
  }
}

inline Assembly assembly_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw JsonFormatError(std::string("assembly: ") + e.what());
  }
  return assembly_from_json(j);
}

inline json strategy_to_json(const Strategy& s) {
  json kraus = json::array();
  for (const auto& set : s.instrument.kraus) {
    json ks = json::array();
    for (const auto& k : set) ks.push_back(matrix_to_json(k));
    kraus.push_back(std::move(ks));
  }
  json settings = json::array();
  for (int y = 0; y < s.n(); ++y) {
    const auto yy = static_cast<std::size_t>(y);
    json labels = json::array();
    for (const auto& l : s.labels[yy]) labels.push_back(label_to_json(l));
    json g = json::array();
    for (const auto& l : s.gspec.subsets[yy]) g.push_back(label_to_json(l));
    json cond = json::array();
    json guess = json::array();
    for (std::size_t c = 0; c < s.instrument.size(); ++c) {
      json effects = json::array();
      for (const auto& m : s.conditional[yy][c]) effects.push_back(matrix_to_json(m.mat()));
      cond.push_back(std::move(effects));
      guess.push_back(s.guess.empty() || !s.guess[yy][c] ? json(nullptr) : label_to_json(*s.guess[yy][c]));
    }
    settings.push_back({{"labels", labels}, {"guessable", g}, {"conditional", cond}, {"guess", guess}});
  }
  return {{"name", s.name},
          {"dim", s.instrument.in_dim()},
          {"outcomes", s.instrument.outcome_names},
          {"kraus", kraus},
          {"settings", settings}};
}

}  // namespace gjm
