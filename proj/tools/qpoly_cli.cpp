// qpoly command-line frontend.
//
// Exit codes: 0 success, 1 domain/data errors, 2 usage errors. Errors are
// reported as one JSON object on stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpoly/qpoly.hpp"

namespace {

using qpoly::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("not a number: '" + s + "'");
  }
}

int to_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw UsageError("not an integer: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("not an integer: '" + s + "'");
  }
}

/// mixed:d | bell | noisy-bell:p | ghz:s | bloch:x,y,z | hs:d (seeded)
qpoly::DensityMatrix parse_state(const std::string& spec, qpoly::RngSeed seed) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "mixed") return qpoly::mixed_state(arg.empty() ? 2 : to_int(arg));
  if (kind == "bell") return qpoly::bell_state();
  if (kind == "noisy-bell") return qpoly::noisy_bell(to_double(arg));
  if (kind == "ghz") return qpoly::ghz_state(to_int(arg));
  if (kind == "hs") return qpoly::random_state_hs(to_int(arg), seed);
  if (kind == "bloch") {
    const auto xs = split(arg, ',');
    if (xs.size() != 3) throw UsageError("bloch state needs x,y,z");
    return qpoly::bloch_qubit(to_double(xs[0]), to_double(xs[1]), to_double(xs[2]));
  }
  throw UsageError("unknown state '" + spec + "'");
}

qpoly::Povm parse_simple_povm(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "sic") return qpoly::sic_qubit();
  if (kind == "mub") return qpoly::mub_qubit();
  if (kind == "skewed-sic") return qpoly::skewed_sic_qubit();
  if (kind == "pauli") return qpoly::pauli_settings_povm(to_int(arg));
  if (kind == "mub-prime") return qpoly::mub_prime(to_int(arg));
  if (kind == "axis") {
    if (arg == "x") return qpoly::axis_povm(0);
    if (arg == "y") return qpoly::axis_povm(1);
    if (arg == "z") return qpoly::axis_povm(2);
    throw UsageError("axis must be x, y or z");
  }
  throw UsageError("unknown POVM '" + spec + "'");
}

/// A simple POVM name or tensor:a,b,... of simple names.
qpoly::Povm parse_povm(const std::string& spec) {
  if (spec.rfind("tensor:", 0) == 0) {
    std::vector<qpoly::Povm> factors;
    for (const auto& f : split(spec.substr(7), ',')) factors.push_back(parse_simple_povm(f));
    return qpoly::tensor_povm(factors);
  }
  return parse_simple_povm(spec);
}

std::vector<std::vector<std::size_t>> parse_groups(const std::string& spec) {
  std::vector<std::vector<std::size_t>> out;
  if (spec.empty()) return out;
  for (const auto& g : split(spec, ';')) {
    std::vector<std::size_t> members;
    for (const auto& m : split(g, ',')) {
      const int v = to_int(m);
      if (v < 0) throw UsageError("group members must be non-negative");
      members.push_back(static_cast<std::size_t>(v));
    }
    out.push_back(std::move(members));
  }
  return out;
}

std::string input_hash(const std::string& bytes) {
  qpoly::Fnv1a h;
  h.update(bytes);
  return h.hex();
}

Json envelope(const std::string& command) {
  Json j;
  j["tool"] = "qpoly";
  j["version"] = QPOLY_VERSION;
  j["command"] = command;
  return j;
}

struct Output {
  std::string path;
  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::cout << text;
      std::cout.flush();
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qpoly::Error(qpoly::ErrorKind::DomainError, "cannot write '" + path + "'");
    out << text;
  }
  void write(const Json& j) const { write(j.dump(2) + "\n"); }
};

struct Loaded {
  qpoly::Dataset ds;
  std::string hash;
};

Loaded load(const std::string& path) {
  const std::string text = qpoly::read_file(path);
  return {qpoly::parse_dataset_text(text), input_hash(text)};
}

void report_error(const std::string& kind, const std::string& message, const qpoly::Error* e = nullptr) {
  Json j;
  j["error"] = kind;
  j["message"] = message;
  if (e) {
    if (!e->pointer().empty() || e->kind() == qpoly::ErrorKind::SchemaError) j["pointer"] = e->pointer();
    if (e->index()) j["index"] = *e->index();
  }
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence polytopes for quantum state tomography"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QPOLY_VERSION));

  std::string dataset_path, out_path;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  auto add_common = [&](CLI::App* sub, bool needs_dataset) {
    if (needs_dataset) sub->add_option("--dataset", dataset_path, "Dataset JSON file")->required();
    sub->add_option("-o,--output", out_path, "Output file (default stdout)");
  };

  auto* build = app.add_subcommand("build", "Build the confidence polytope and write its facets");
  add_common(build, true);
  bool with_report = false;
  build->add_flag("--report", with_report, "Also report bounding box, Chebyshev ball and MLE");

  auto* bbox = app.add_subcommand("bbox", "Axis-aligned bounding box of the polytope");
  add_common(bbox, true);

  auto* sample = app.add_subcommand("sample", "Uniform hit-and-run samples from the polytope");
  add_common(sample, true);
  qpoly::SamplerOptions sopts;
  sample->add_option("--count", sopts.count, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--burn-in", sopts.burn_in, "Chain steps discarded before recording");
  sample->add_option("--thinning", sopts.thinning, "Chain steps per recorded sample")->check(CLI::PositiveNumber);
  sample->add_option("--chains", sopts.chains, "Independent chains with derived seeds")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "Base RNG seed");
  sample->add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  auto* fom = app.add_subcommand("fom", "Range of a figure of merit over the polytope");
  add_common(fom, true);
  std::string fom_kind = "fidelity", reference, dims_spec;
  std::size_t cut = 0, fom_samples = 10000;
  fom->add_option("--fom", fom_kind)->check(CLI::IsMember({"fidelity", "trace_distance", "negativity"}));
  fom->add_option("--reference", reference, "mle, a state spec (bell, ghz:3, ...) or a JSON matrix file");
  fom->add_option("--dims", dims_spec, "Subsystem dimensions, e.g. 2,2");
  fom->add_option("--cut", cut, "Bipartition position");
  fom->add_option("--samples", fom_samples, "Number of polytope samples")->check(CLI::PositiveNumber);
  fom->add_option("--seed", seed, "Base RNG seed");
  fom->add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  auto* mesh = app.add_subcommand("mesh", "Triangle mesh of a qubit polytope clipped to the Bloch ball");
  add_common(mesh, true);

  auto* simulate = app.add_subcommand("simulate", "Simulate measurement data and write a dataset");
  add_common(simulate, false);
  std::string state_spec = "mixed:2", povm_spec = "sic", groups_spec;
  std::int64_t shots = 1000;
  double eps = 0.05;
  simulate->add_option("--state", state_spec, "mixed:d, bell, noisy-bell:p, ghz:s, bloch:x,y,z or hs:d");
  simulate->add_option("--povm", povm_spec, "sic, mub, skewed-sic, pauli:s, mub-prime:d, axis:x|y|z or tensor:a,b");
  simulate->add_option("--n", shots, "Shots per experiment")->check(CLI::PositiveNumber);
  simulate->add_option("--epsilon", eps, "Total error budget");
  simulate->add_option("--groups", groups_spec, "Grouping scheme, e.g. 0,1;2,3");
  simulate->add_option("--seed", seed, "Base RNG seed");

  auto* coverage = app.add_subcommand("coverage", "Empirical coverage over simulated repetitions");
  add_common(coverage, false);
  std::size_t reps = 500;
  coverage->add_option("--state", state_spec, "mixed:d, bell, noisy-bell:p, ghz:s, bloch:x,y,z or hs:d");
  coverage->add_option("--povm", povm_spec, "sic, mub, skewed-sic, pauli:s, mub-prime:d, axis:x|y|z or tensor:a,b");
  coverage->add_option("--n", shots, "Shots per experiment")->check(CLI::PositiveNumber);
  coverage->add_option("--epsilon", eps, "Total error budget");
  coverage->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
  coverage->add_option("--groups", groups_spec, "Grouping scheme, e.g. 0,1;2,3");
  coverage->add_option("--seed", seed, "Base RNG seed");
  coverage->add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  auto* cred = app.add_subcommand("credibility", "Credibility of polytopes under the Hilbert-Schmidt prior (CSV)");
  add_common(cred, false);
  cred->add_option("--dataset", dataset_path, "Estimate for one dataset instead of a scan");
  std::string scan_dims = "2", scan_ns = "1000", proposal = "automatic";
  std::size_t mc = 200000;
  cred->add_option("--dims", scan_dims, "Dimensions to scan, e.g. 2,3");
  cred->add_option("--ns", scan_ns, "Data sizes to scan, e.g. 500,1000");
  cred->add_option("--reps", reps, "Repetitions");
  cred->add_option("--epsilon", eps, "Total error budget");
  cred->add_option("--mc", mc, "Importance-sampling draws per estimate");
  cred->add_option("--proposal", proposal)->check(CLI::IsMember({"automatic", "prior", "laplace"}));
  cred->add_option("--seed", seed, "Base RNG seed");
  cred->add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return 2;
  }

  const Output out{out_path};
  const qpoly::RngSeed rseed{seed};
  try {
    if (build->parsed()) {
      const auto in = load(dataset_path);
      const auto poly = qpoly::build_from_dataset(in.ds);
      Json j = envelope("build");
      j["input_hash"] = in.hash;
      j["polytope"] = qpoly::polytope_to_json(poly);
      if (with_report) {
        try {
          j["bounding_box"] = qpoly::bbox_to_json(qpoly::bounding_box(poly));
        } catch (const qpoly::Error& e) {
          j["bounding_box"] = {{"error", qpoly::to_string(e.kind())}, {"message", e.what()}};
        }
        try {
          j["chebyshev"] = qpoly::chebyshev_to_json(qpoly::chebyshev_center(poly));
        } catch (const qpoly::Error& e) {
          j["chebyshev"] = {{"error", qpoly::to_string(e.kind())}, {"message", e.what()}};
        }
        j["mle"] = qpoly::mle_to_json(qpoly::mle_estimate(in.ds.povm, in.ds.counts));
      }
      out.write(j);
    } else if (bbox->parsed()) {
      const auto in = load(dataset_path);
      Json j = envelope("bbox");
      j["input_hash"] = in.hash;
      j["bounding_box"] = qpoly::bbox_to_json(qpoly::bounding_box(qpoly::build_from_dataset(in.ds)));
      out.write(j);
    } else if (sample->parsed()) {
      const auto in = load(dataset_path);
      sopts.seed = rseed;
      sopts.threads = threads;
      const auto set = qpoly::hit_and_run_sample(qpoly::build_from_dataset(in.ds), sopts);
      Json j = envelope("sample");
      j["input_hash"] = in.hash;
      j["rng"] = qpoly::Rng::kAlgorithm;
      j["samples"] = qpoly::samples_to_json(set);
      out.write(j);
    } else if (fom->parsed()) {
      const auto in = load(dataset_path);
      const auto poly = qpoly::build_from_dataset(in.ds);
      qpoly::FomSpec spec;
      if (fom_kind == "fidelity") spec.kind = qpoly::FomKind::fidelity;
      if (fom_kind == "trace_distance") spec.kind = qpoly::FomKind::trace_distance;
      if (fom_kind == "negativity") spec.kind = qpoly::FomKind::negativity;
      if (spec.kind == qpoly::FomKind::negativity) {
        if (dims_spec.empty() || cut == 0) throw UsageError("negativity needs --dims and --cut");
        for (const auto& x : split(dims_spec, ',')) spec.dims.push_back(to_int(x));
        spec.cut = cut;
      } else {
        if (reference.empty()) throw UsageError("--reference is required for fidelity and trace distance");
        if (reference == "mle") {
          spec.reference = qpoly::mle_estimate(in.ds.povm, in.ds.counts).state;
        } else if (std::ifstream(reference).good()) {
          const Json m = Json::parse(qpoly::read_file(reference));
          spec.reference = qpoly::DensityMatrix(qpoly::detail::parse_matrix(m, in.ds.dim, ""));
        } else {
          spec.reference = parse_state(reference, rseed);
        }
      }
      qpoly::SamplerOptions fo;
      fo.count = fom_samples;
      fo.seed = rseed;
      fo.threads = threads;
      const auto res = qpoly::fom_interval(poly, spec, fo);
      Json j = envelope("fom");
      j["input_hash"] = in.hash;
      j["rng"] = qpoly::Rng::kAlgorithm;
      j["reference"] = reference;
      j["dims"] = spec.dims;
      j["cut"] = spec.cut;
      j["interval"] = qpoly::fom_to_json(res);
      out.write(j);
    } else if (mesh->parsed()) {
      const auto in = load(dataset_path);
      Json j = envelope("mesh");
      j["input_hash"] = in.hash;
      j.update(qpoly::mesh_to_json(qpoly::mesh_qubit_polytope(qpoly::build_from_dataset(in.ds))));
      out.write(j);
    } else if (simulate->parsed()) {
      const auto povm = parse_povm(povm_spec);
      const auto rho = parse_state(state_spec, rseed.derive(0));
      const auto counts = qpoly::sample_counts(rho, povm, shots, rseed.derive(1));
      qpoly::Dataset ds{povm.dim(), povm, counts, eps, qpoly::EpsilonSplit::uniform(), parse_groups(groups_spec)};
      if (!(eps > 0.0 && eps < 1.0)) throw qpoly::Error(qpoly::ErrorKind::DomainError, "epsilon must lie in (0,1)");
      ds.meta = envelope("simulate");
      ds.meta["state"] = state_spec;
      ds.meta["povm"] = povm_spec;
      ds.meta["n"] = shots;
      ds.meta["seed"] = seed;
      ds.meta["rng"] = qpoly::Rng::kAlgorithm;
      out.write(qpoly::dataset_to_json(ds));
    } else if (coverage->parsed()) {
      const auto povm = parse_povm(povm_spec);
      const auto rho = parse_state(state_spec, rseed.derive(0));
      qpoly::CoverageOptions co;
      co.n = shots;
      co.eps = eps;
      co.repetitions = reps;
      co.seed = rseed.derive(1);
      co.groups = parse_groups(groups_spec);
      co.threads = threads;
      const auto res = qpoly::empirical_coverage(rho, povm, co);
      Json j = envelope("coverage");
      j["rng"] = qpoly::Rng::kAlgorithm;
      j["seed"] = seed;
      j["state"] = state_spec;
      j["povm"] = povm_spec;
      j["n"] = shots;
      j["epsilon"] = eps;
      j["repetitions"] = res.repetitions;
      j["hits"] = res.hits;
      j["rate"] = res.rate;
      j["sigma"] = res.sigma;
      out.write(j);
    } else if (cred->parsed()) {
      qpoly::ProposalKind pk = qpoly::ProposalKind::automatic;
      if (proposal == "prior") pk = qpoly::ProposalKind::prior;
      if (proposal == "laplace") pk = qpoly::ProposalKind::laplace;
      std::ostringstream csv;
      csv << "# tool=qpoly version=" << QPOLY_VERSION << "\n";
      csv << "# rng=" << qpoly::Rng::kAlgorithm << "\n";
      csv << "# seed=" << seed << " mc=" << mc << " proposal=" << proposal << "\n";
      csv.precision(17);
      auto num = [](double v) {
        if (std::isnan(v)) return std::string("nan");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
      };
      std::vector<qpoly::ScanRow> rows;
      if (!dataset_path.empty()) {
        const auto in = load(dataset_path);
        csv << "# input_hash=" << in.hash << "\n";
        qpoly::ScanRow row{in.ds.dim, in.ds.counts.total(), 0, in.ds.epsilon};
        qpoly::CredibilityOptions co;
        co.mc = mc;
        co.seed = rseed;
        co.proposal = pk;
        co.threads = threads;
        try {
          const auto est = qpoly::estimate_credibility(qpoly::build_from_dataset(in.ds), in.ds.povm, in.ds.counts, co);
          row.eps_b_hat = est.eps_b_hat;
          row.std_error = est.std_error;
          row.ess = est.effective_sample_size;
          row.ratio = in.ds.epsilon / est.eps_b_hat;
        } catch (const qpoly::Error& e) {
          if (e.kind() != qpoly::ErrorKind::DegenerateWeights) throw;
          row.degenerate = true;
        }
        rows.push_back(row);
      } else {
        std::vector<int> dims;
        std::vector<std::int64_t> ns;
        for (const auto& x : split(scan_dims, ',')) dims.push_back(to_int(x));
        for (const auto& x : split(scan_ns, ',')) ns.push_back(to_int(x));
        csv << "# scan dims=" << scan_dims << " ns=" << scan_ns << " reps=" << reps << " eps=" << num(eps) << "\n";
        qpoly::ScanOptions so;
        so.mc = mc;
        so.seed = rseed;
        so.proposal = pk;
        so.threads = threads;
        rows = qpoly::ratio_scan(dims, ns, reps, eps, so);
      }
      csv << "d,n,rep,eps,eps_b_hat,stderr,ess,ratio\n";
      for (const auto& r : rows)
        csv << r.d << "," << r.n << "," << r.rep << "," << num(r.eps) << "," << num(r.eps_b_hat) << ","
            << num(r.std_error) << "," << num(r.ess) << "," << num(r.ratio) << "\n";
      out.write(csv.str());
    }
  } catch (const UsageError& e) {
    report_error("UsageError", e.what());
    return 2;
  } catch (const qpoly::Error& e) {
    report_error(std::string(qpoly::to_string(e.kind())), e.what(), &e);
    return 1;
  } catch (const nlohmann::json::exception& e) {
    report_error("SchemaError", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return 1;
  }
  return 0;
}
