#pragma once

// JSON dataset ingestion and report serialisation.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qpoly/credibility.hpp"
#include "qpoly/coverage.hpp"
#include "qpoly/figures_of_merit.hpp"
#include "qpoly/geometry.hpp"
#include "qpoly/mesh.hpp"
#include "qpoly/polytope.hpp"

namespace qpoly {

using Json = nlohmann::ordered_json;

struct Dataset {
  int dim = 0;
  Povm povm;
  CountVector counts;
  double epsilon = 0.0;
  EpsilonSplit split;
  std::vector<std::vector<std::size_t>> groups;
  Json meta = Json::object();
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorKind::SchemaError, what, std::nullopt, pointer);
}

inline const Json& require(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error("/" + key, "missing field '" + key + "'");
  return *it;
}

inline CMatrix parse_matrix(const Json& j, int d, const std::string& ptr) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(d)) schema_error(ptr, "expected a d x d matrix");
  CMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    const std::string rp = ptr + "/" + std::to_string(r);
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d)) schema_error(rp, "expected a row of d entries");
    for (int c = 0; c < d; ++c) {
      const Json& z = row[static_cast<std::size_t>(c)];
      const std::string zp = rp + "/" + std::to_string(c);
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        schema_error(zp, "expected a [re, im] pair");
      m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

}  // namespace detail

inline Json matrix_to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    out.push_back(std::move(row));
  }
  return out;
}

inline Json vector_to_json(const RVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// Validates against the schema-1 layout; structural problems raise
/// SchemaError with a JSON pointer, physical ones the quantum-core errors.
inline Dataset parse_dataset(const Json& j) {
  if (!j.is_object()) detail::schema_error("", "dataset must be a JSON object");
  const Json& schema = detail::require(j, "schema");
  if (!schema.is_number_integer() || schema.get<int>() != 1) detail::schema_error("/schema", "unsupported schema version");
  const Json& dim = detail::require(j, "dim");
  if (!dim.is_number_integer() || dim.get<int>() < 2 || dim.get<int>() > 64)
    detail::schema_error("/dim", "dim must be an integer in [2, 64]");
  const int d = dim.get<int>();

  const Json& pj = detail::require(j, "povm");
  if (!pj.is_array() || pj.empty()) detail::schema_error("/povm", "povm must be a non-empty array");
  std::vector<CMatrix> elements;
  for (std::size_t i = 0; i < pj.size(); ++i) elements.push_back(detail::parse_matrix(pj[i], d, "/povm/" + std::to_string(i)));

  const Json& cj = detail::require(j, "counts");
  if (!cj.is_array() || cj.size() != elements.size())
    detail::schema_error("/counts", "counts must be an array with one entry per POVM element");
  std::vector<std::int64_t> counts;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    if (!cj[i].is_number_integer() || cj[i].get<std::int64_t>() < 0)
      detail::schema_error("/counts/" + std::to_string(i), "counts must be non-negative integers");
    counts.push_back(cj[i].get<std::int64_t>());
  }

  const Json& ej = detail::require(j, "epsilon");
  if (!ej.is_number() || !(ej.get<double>() > 0.0 && ej.get<double>() < 1.0))
    detail::schema_error("/epsilon", "epsilon must be a number in (0, 1)");

  EpsilonSplit split;
  if (auto it = j.find("epsilon_split"); it != j.end()) {
    if (!it->is_object()) detail::schema_error("/epsilon_split", "epsilon_split must be an object");
    const auto st = it->find("strategy");
    if (st == it->end() || !st->is_string()) detail::schema_error("/epsilon_split/strategy", "missing strategy");
    if (*st == "uniform") {
      split = EpsilonSplit::uniform();
    } else if (*st == "weighted") {
      const auto w = it->find("weights");
      if (w == it->end() || !w->is_array()) detail::schema_error("/epsilon_split/weights", "weighted split needs weights");
      std::vector<double> weights;
      for (std::size_t i = 0; i < w->size(); ++i) {
        if (!(*w)[i].is_number()) detail::schema_error("/epsilon_split/weights/" + std::to_string(i), "weights must be numbers");
        weights.push_back((*w)[i].get<double>());
      }
      split = EpsilonSplit::weighted(std::move(weights));
    } else {
      detail::schema_error("/epsilon_split/strategy", "strategy must be 'uniform' or 'weighted'");
    }
  }

  std::vector<std::vector<std::size_t>> groups;
  if (auto it = j.find("groups"); it != j.end()) {
    if (!it->is_array()) detail::schema_error("/groups", "groups must be an array of index arrays");
    for (std::size_t g = 0; g < it->size(); ++g) {
      const Json& grp = (*it)[g];
      const std::string gp = "/groups/" + std::to_string(g);
      if (!grp.is_array()) detail::schema_error(gp, "group must be an array of indices");
      std::vector<std::size_t> members;
      for (std::size_t k = 0; k < grp.size(); ++k) {
        if (!grp[k].is_number_integer() || grp[k].get<std::int64_t>() < 0)
          detail::schema_error(gp + "/" + std::to_string(k), "group members must be non-negative integers");
        members.push_back(grp[k].get<std::size_t>());
      }
      groups.push_back(std::move(members));
    }
  }

  Json meta = Json::object();
  if (auto it = j.find("meta"); it != j.end()) {
    if (!it->is_object()) detail::schema_error("/meta", "meta must be an object");
    meta = *it;
  }

  return Dataset{d,         embed_povm(std::move(elements), gellmann_basis(d)), CountVector(std::move(counts)),
                 ej.get<double>(), std::move(split), std::move(groups), std::move(meta)};
}

inline Dataset parse_dataset_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::schema_error("", std::string("invalid JSON: ") + e.what());
  }
  return parse_dataset(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Dataset ingest_dataset(const std::string& path) { return parse_dataset_text(read_file(path)); }

inline Json dataset_to_json(const Dataset& ds) {
  Json j;
  j["schema"] = 1;
  j["dim"] = ds.dim;
  Json povm = Json::array();
  for (const auto& e : ds.povm.elements()) povm.push_back(matrix_to_json(e));
  j["povm"] = std::move(povm);
  j["counts"] = ds.counts.counts();
  j["epsilon"] = ds.epsilon;
  Json split;
  split["strategy"] = ds.split.strategy == EpsilonSplit::Strategy::uniform ? "uniform" : "weighted";
  if (ds.split.strategy == EpsilonSplit::Strategy::weighted) split["weights"] = ds.split.weights;
  j["epsilon_split"] = std::move(split);
  if (!ds.groups.empty()) j["groups"] = ds.groups;
  if (!ds.meta.empty()) j["meta"] = ds.meta;
  return j;
}

inline ConfidencePolytope build_from_dataset(const Dataset& ds) {
  if (ds.groups.empty()) return build_polytope(ds.povm, ds.counts, ds.epsilon, ds.split);
  return build_grouped_polytope(ds.povm, ds.counts, ds.epsilon, ds.groups, ds.split);
}

inline Json facet_to_json(const Facet& f) {
  Json j;
  j["normal"] = vector_to_json(f.normal);
  j["offset"] = f.offset;
  j["eps_i"] = f.eps_i;
  j["clamped"] = f.clamped;
  j["members"] = f.provenance.members;
  j["grouped"] = f.provenance.grouped;
  j["count"] = f.provenance.count;
  j["total"] = f.provenance.total;
  return j;
}

inline Json polytope_to_json(const ConfidencePolytope& poly) {
  Json j;
  j["dim"] = poly.dim();
  j["basis"] = poly.basis().name();
  j["epsilon_total"] = poly.epsilon_total();
  Json facets = Json::array();
  for (const auto& f : poly.facets()) facets.push_back(facet_to_json(f));
  j["facets"] = std::move(facets);
  return j;
}

inline Json bbox_to_json(const BoundingBox& box) {
  Json j;
  j["lo"] = box.lo;
  j["hi"] = box.hi;
  std::vector<double> edges;
  for (std::size_t i = 0; i < box.lo.size(); ++i) edges.push_back(box.edge(i));
  j["edges"] = edges;
  j["longest_axis"] = box.longest_axis;
  return j;
}

inline Json chebyshev_to_json(const ChebyshevBall& ball) {
  Json j;
  j["center"] = vector_to_json(ball.center.coords);
  j["radius"] = ball.radius;
  return j;
}

inline Json mle_to_json(const MleResult& mle) {
  Json j;
  j["state"] = matrix_to_json(mle.state.matrix());
  j["log_likelihood"] = mle.log_likelihood;
  j["iterations"] = mle.iterations;
  j["informationally_complete"] = mle.informationally_complete;
  return j;
}

inline Json samples_to_json(const SampleSet& s) {
  Json j;
  j["seed"] = s.seed.value;
  j["burn_in"] = s.burn_in;
  j["thinning"] = s.thinning;
  j["chains"] = s.chain_count;
  Json pts = Json::array();
  for (const auto& p : s.points) pts.push_back(vector_to_json(p));
  j["points"] = std::move(pts);
  return j;
}

inline Json fom_to_json(const FomInterval& f) {
  Json j;
  j["fom"] = to_string(f.kind);
  j["lower"] = f.lower;
  j["upper"] = f.upper;
  j["samples"] = f.sample_count;
  j["seed"] = f.seed.value;
  j["argmin"] = vector_to_json(f.argmin);
  j["argmax"] = vector_to_json(f.argmax);
  return j;
}

inline Json mesh_to_json(const TriangleMesh& mesh) {
  Json j;
  Json v = Json::array();
  for (const auto& p : mesh.vertices) v.push_back({p.x(), p.y(), p.z()});
  j["vertices"] = std::move(v);
  Json t = Json::array();
  for (const auto& tri : mesh.triangles) t.push_back({tri[0], tri[1], tri[2]});
  j["triangles"] = std::move(t);
  return j;
}

}  // namespace qpoly
