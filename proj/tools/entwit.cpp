// entwit: dataset generation, SVM training and sweeps, witness export and
// circuit simulation from the command line.
//
// Exit codes: 0 success, 2 invalid input, 3 non-convergence under --strict,
// 1 anything else (I/O failures and the like).

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "entwit/entwit.hpp"

namespace fs = std::filesystem;
using namespace entwit;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNonConvergence = 3;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Profile {
  std::size_t two_qubit_count = 20000;  // per class, before splitting
  std::size_t three_qubit_total = 20000;
  std::vector<int> degrees{1, 2, 3, 4};
  double lambda_plus = 10.0;
  std::vector<double> grid;
  double p_min = 0.98;
};

Profile profile_named(const std::string& name) {
  Profile p;
  if (name == "desk") {
    p.grid = svm::log_grid(5.0, 80.0, 7);
  } else if (name == "paper") {
    p.two_qubit_count = 1000000;
    p.three_qubit_total = 200000;
    p.degrees = {1, 2, 3, 4, 5, 6, 7, 8};
    p.lambda_plus = 1.0;
    p.grid = svm::default_lambda_grid();
    p.p_min = 1.0;
  } else {
    throw InvalidInput("unknown profile '" + name + "' (expected desk or paper)");
  }
  return p;
}

struct Global {
  std::uint64_t seed = 7;
  std::string profile = "desk";
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out = "entwit-out";
  bool strict = false;
};

// Provenance stamped on every artifact: seed, config hash and input hashes.
struct Stamp {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> inputs;

  std::string csv_comment() const {
    std::string s = "# seed=" + std::to_string(seed) + ", config=" + config_hash;
    for (const auto& [k, v] : inputs) s += ", " + k + "=" + v;
    return s;
  }
  nlohmann::json json() const { return {{"seed", seed}, {"config_hash", config_hash}, {"inputs", inputs}}; }
};

// The snapshot CLI11 writes can be fed back through --config. Paths that only
// choose where output lands (and the worker count) are left out of the hash.
std::string config_hash(const std::string& snapshot) {
  std::istringstream in(snapshot);
  std::string line, kept;
  while (std::getline(in, line)) {
    const auto key = line.substr(0, line.find('='));
    const auto trimmed = key.substr(0, key.find_last_not_of(' ') + 1);
    if (trimmed == "threads" || trimmed == "out" || trimmed == "config") continue;
    // CLI11 quotes and brackets defaults differently from values read back
    std::string canon;
    for (char ch : line)
      if (ch != '"' && ch != '\'' && ch != '[' && ch != ']' && ch != ' ') canon += ch;
    kept += canon + '\n';
  }
  return hex_digest(fnv1a(kept));
}

// Unset list options come out as key="" and would not parse back.
std::string drop_empty_lists(const std::string& snapshot) {
  std::istringstream in(snapshot);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
    kept += line + '\n';
  }
  return kept;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string file_digest(const std::string& path) {
  if (!fs::exists(path)) throw InvalidInput("input file '" + path + "' does not exist");
  return hex_digest(file_hash(path));
}

datagen::Split parse_split_or_throw(const std::string& s) {
  try {
    return datagen::parse_split(s);
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(e.what());
  }
}

void require_split(const datagen::LabeledDataset& ds, datagen::Split s, const std::string& path) {
  if (ds.count(s) == 0)
    throw InvalidInput("dataset '" + path + "' has no rows in split '" + std::string(datagen::to_string(s)) + "'");
  const auto y = ds.labels(s);
  if (s == datagen::Split::Train &&
      (std::find(y.begin(), y.end(), 1) == y.end() || std::find(y.begin(), y.end(), -1) == y.end()))
    throw InvalidInput("training split of '" + path + "' needs both labels");
}

std::string csv_number(double v) { return datagen::format_double(v); }

void write_metrics_header(std::ostream& out) {
  out << "degree,lambda_minus,split,rows,accuracy,precision,recall,negative_accuracy,true_pos,true_neg,false_pos,"
         "false_neg\n";
}

void write_metrics_row(std::ostream& out, int degree, double lambda_minus, datagen::Split s, const svm::Metrics& m) {
  out << degree << ',' << csv_number(lambda_minus) << ',' << datagen::to_string(s) << ',' << m.total() << ','
      << csv_number(m.accuracy()) << ',' << csv_number(m.precision()) << ',' << csv_number(m.recall()) << ','
      << csv_number(m.negative_accuracy()) << ',' << m.true_pos << ',' << m.true_neg << ',' << m.false_pos << ','
      << m.false_neg << '\n';
}

// Accuracy per generating family on one split.
void write_family_rows(std::ostream& out, int degree, const svm::SvmModel& model, const datagen::LabeledDataset& ds,
                       datagen::Split s, int threads) {
  const auto idx = ds.indices(s);
  if (idx.empty()) return;
  const auto pred = svm::predict(model, ds.gather(idx), threads);
  std::map<std::string, std::pair<long, long>> tally;  // family -> (correct, total)
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto& t = tally[ds.rows[idx[k]].family];
    t.first += pred[k] == ds.rows[idx[k]].label;
    ++t.second;
  }
  for (const auto& [fam, t] : tally)
    out << degree << ',' << datagen::to_string(s) << ',' << fam << ',' << t.second << ','
        << csv_number(double(t.first) / double(t.second)) << '\n';
}

struct ConvergenceLog {
  std::vector<std::string> failures;
  void check(const svm::SvmModel& m, const std::string& what) {
    if (m.training.converged) return;
    failures.push_back(what);
    std::cerr << "warning: " << what << " stopped at the iteration cap (KKT residual "
              << m.training.kkt_residual << ")\n";
  }
};

std::string model_file(const std::string& dir, int degree) { return join_path(dir, "model_n" + std::to_string(degree) + ".json"); }

// Commands ------------------------------------------------------------------------

struct GenArgs {
  std::string kind = "two-qubit";
  std::size_t count = 0;  // 0: profile default
  std::vector<double> splits;
  double margin = datagen::kDefaultGmeMargin;
  bool states = false;
};

void cmd_gen(const Global& g, const GenArgs& a, const Stamp& stamp) {
  const Profile prof = profile_named(g.profile);
  datagen::DatasetKind kind;
  try {
    kind = datagen::parse_kind(a.kind);
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(e.what());
  }
  if (!a.splits.empty() && a.splits.size() != 3) throw InvalidInput("--splits takes three fractions");

  datagen::LabeledDataset ds;
  nlohmann::json summary;
  if (kind == datagen::DatasetKind::TwoQubit) {
    datagen::TwoQubitOptions opt;
    if (!a.splits.empty()) opt.splits = {a.splits[0], a.splits[1], a.splits[2]};
    opt.keep_states = a.states;
    opt.threads = g.threads;
    datagen::TwoQubitStats st;
    ds = datagen::sample_two_qubit_balanced(a.count ? a.count : prof.two_qubit_count, g.seed, opt, &st);
    summary["draws"] = st.draws;
    summary["separable_draws"] = st.separable_draws;
    summary["separable_fraction"] = double(st.separable_draws) / double(st.draws);
  } else {
    datagen::ThreeQubitOptions opt;
    if (!a.splits.empty()) opt.splits = {a.splits[0], a.splits[1], a.splits[2]};
    opt.gme_margin = a.margin;
    opt.keep_states = a.states;
    opt.threads = g.threads;
    ds = datagen::build_three_qubit_dataset(kind, a.count ? a.count : prof.three_qubit_total, g.seed, opt);
  }
  ds.config_hash = stamp.config_hash;

  ensure_dir(g.out);
  const auto csv = join_path(g.out, "dataset.csv");
  const auto bin = a.states ? join_path(g.out, "dataset.states.bin") : std::string{};
  datagen::save_dataset(ds, csv, bin);

  std::map<std::string, std::size_t> histogram;
  for (const auto& r : ds.rows) ++histogram[r.label > 0 ? "+1" : "-1"];
  summary["provenance"] = stamp.json();
  summary["kind"] = a.kind;
  summary["rows"] = ds.rows.size();
  summary["labels"] = histogram;
  summary["splits"] = {{"train", ds.count(datagen::Split::Train)},
                       {"validation", ds.count(datagen::Split::Validation)},
                       {"test", ds.count(datagen::Split::Test)}};
  summary["dataset_hash"] = hex_digest(datagen::dataset_hash(ds));
  open_out(join_path(g.out, "gen.json")) << summary.dump(2) << '\n';
  std::cout << "wrote " << csv << " (" << ds.rows.size() << " rows, hash " << summary["dataset_hash"].get<std::string>()
            << ")\n";
}

struct TrainArgs {
  std::string data;
  std::vector<int> degrees;
  double lambda_plus = 0.0;  // 0: profile default
  double lambda_minus = 1.0;
  std::vector<double> grid;
  double p_min = -1.0;  // <0: profile default
  double tol = 1e-3;
  double cache_mb = 1024.0;
  long max_iterations = 0;
};

svm::TrainOptions train_options(const TrainArgs& a, const Profile& prof, int degree) {
  svm::TrainOptions o;
  o.degree = degree;
  o.lambda_plus = a.lambda_plus > 0.0 ? a.lambda_plus : prof.lambda_plus;
  o.lambda_minus = a.lambda_minus;
  o.tol = a.tol;
  o.cache_mb = a.cache_mb;
  o.max_iterations = a.max_iterations;
  return o;
}

void stamp_model(svm::SvmModel& m, const Stamp& stamp, const datagen::LabeledDataset& ds) {
  m.training.seed = stamp.seed;
  m.training.config_hash = stamp.config_hash;
  m.training.dataset_hash = stamp.inputs.at("data");
  if (m.n_qubits == 0) m.n_qubits = ds.n_qubits;
}

struct Loaded {
  datagen::LabeledDataset ds;
  std::string digest;
};

Loaded load_input(const std::string& path) {
  Loaded l;
  l.digest = file_digest(path);
  try {
    l.ds = datagen::load_dataset(path);
  } catch (const datagen::DatasetFormatError& e) {
    throw InvalidInput(e.what());
  }
  return l;
}

void cmd_train(const Global& g, const TrainArgs& a, Stamp stamp, ConvergenceLog& conv) {
  const Profile prof = profile_named(g.profile);
  const auto in = load_input(a.data);
  stamp.inputs["data"] = in.digest;
  const auto& ds = in.ds;
  require_split(ds, datagen::Split::Train, a.data);
  const auto degrees = a.degrees.empty() ? prof.degrees : a.degrees;
  ensure_dir(g.out);
  auto metrics = open_out(join_path(g.out, "train_metrics.csv"));
  metrics << stamp.csv_comment() << '\n';
  write_metrics_header(metrics);
  const auto xtr = ds.samples(datagen::Split::Train);
  const auto ytr = ds.labels(datagen::Split::Train);
  for (int n : degrees) {
    auto r = svm::train(xtr, ytr, train_options(a, prof, n));
    stamp_model(r.model, stamp, ds);
    conv.check(r.model, "degree " + std::to_string(n));
    svm::save_model(r.model, model_file(g.out, n));
    for (auto s : {datagen::Split::Train, datagen::Split::Validation, datagen::Split::Test}) {
      if (ds.count(s) == 0) continue;
      write_metrics_row(metrics, n, a.lambda_minus, s, svm::evaluate(r.model, ds.samples(s), ds.labels(s), g.threads));
    }
    std::cout << "degree " << n << ": " << r.model.support_count() << " support vectors, "
              << r.model.training.iterations << " iterations\n";
  }
}

void cmd_sweep(const Global& g, const TrainArgs& a, Stamp stamp, ConvergenceLog& conv) {
  const Profile prof = profile_named(g.profile);
  const auto in = load_input(a.data);
  stamp.inputs["data"] = in.digest;
  const auto& ds = in.ds;
  require_split(ds, datagen::Split::Train, a.data);
  require_split(ds, datagen::Split::Validation, a.data);
  auto grid = a.grid.empty() ? prof.grid : a.grid;
  std::sort(grid.begin(), grid.end());
  const auto degrees = a.degrees.empty() ? prof.degrees : a.degrees;
  ensure_dir(g.out);

  auto sweep_csv = open_out(join_path(g.out, "sweep.csv"));
  sweep_csv << stamp.csv_comment() << '\n'
            << "degree,lambda_minus,accuracy,precision,recall,kkt_residual,iterations,converged,support_vectors\n";
  auto sel_csv = open_out(join_path(g.out, "selection.csv"));
  sel_csv << stamp.csv_comment() << '\n';
  write_metrics_header(sel_csv);
  auto fam_csv = open_out(join_path(g.out, "family_accuracy.csv"));
  fam_csv << stamp.csv_comment() << '\n' << "degree,split,family,rows,accuracy\n";

  const auto xtr = ds.samples(datagen::Split::Train);
  const auto ytr = ds.labels(datagen::Split::Train);
  const auto xva = ds.samples(datagen::Split::Validation);
  const auto yva = ds.labels(datagen::Split::Validation);
  for (int n : degrees) {
    svm::SweepOptions o;
    o.train = train_options(a, prof, n);
    o.p_min = a.p_min >= 0.0 ? a.p_min : prof.p_min;
    o.threads = g.threads;
    o.progress = [&](const svm::SweepRow& row) {
      const auto& v = row.validation;
      sweep_csv << n << ',' << csv_number(row.lambda_minus) << ',' << csv_number(v.accuracy()) << ','
                << csv_number(v.precision()) << ',' << csv_number(v.recall()) << ',' << csv_number(row.kkt_residual)
                << ',' << row.iterations << ',' << (row.converged ? 1 : 0) << ',' << row.support_count << '\n';
      sweep_csv.flush();
      if (!row.converged) conv.check(svm::SvmModel{}, "degree " + std::to_string(n) + " at lambda_minus " +
                                                          csv_number(row.lambda_minus));
    };
    auto r = svm::sweep_lambda(xtr, ytr, xva, yva, grid, o);
    auto& model = r.model;
    stamp_model(model, stamp, ds);
    svm::save_model(model, model_file(g.out, n));
    const double lstar = r.rows[r.selected].lambda_minus;
    for (auto s : {datagen::Split::Train, datagen::Split::Validation, datagen::Split::Test}) {
      if (ds.count(s) == 0) continue;
      write_metrics_row(sel_csv, n, lstar, s, svm::evaluate(model, ds.samples(s), ds.labels(s), g.threads));
    }
    if (ds.n_qubits == 3) write_family_rows(fam_csv, n, model, ds, datagen::Split::Test, g.threads);
    std::cout << "degree " << n << ": lambda* = " << lstar
              << (r.reached_p_min ? "" : " (precision floor not reached, most precise point kept)") << '\n';
  }
}

struct EvalArgs {
  std::vector<std::string> models;
  std::string data;
  std::vector<std::string> splits{"test"};
};

void cmd_eval(const Global& g, const EvalArgs& a, Stamp stamp) {
  const auto in = load_input(a.data);
  stamp.inputs["data"] = in.digest;
  const auto& ds = in.ds;
  std::vector<std::pair<std::string, svm::SvmModel>> models;
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    stamp.inputs["model" + std::to_string(i + 1)] = file_digest(a.models[i]);
    try {
      models.emplace_back(a.models[i], svm::load_model(a.models[i]));
    } catch (const std::runtime_error& e) {
      throw InvalidInput(e.what());
    }
    if (models.back().second.feature_dimension() != datagen::feature_dimension(ds.n_qubits))
      throw InvalidInput("model '" + a.models[i] + "' does not match the dataset's qubit count");
  }
  ensure_dir(g.out);
  auto metrics = open_out(join_path(g.out, "eval_metrics.csv"));
  metrics << stamp.csv_comment() << '\n';
  write_metrics_header(metrics);
  auto fam = open_out(join_path(g.out, "eval_family_accuracy.csv"));
  fam << stamp.csv_comment() << '\n' << "degree,split,family,rows,accuracy\n";
  for (const auto& split_name : a.splits) {
    const auto s = parse_split_or_throw(split_name);
    require_split(ds, s, a.data);
    for (const auto& [path, m] : models) {
      const auto met = svm::evaluate(m, ds.samples(s), ds.labels(s), g.threads);
      write_metrics_row(metrics, m.degree, m.lambda_minus, s, met);
      write_family_rows(fam, m.degree, m, ds, s, g.threads);
      std::cout << path << " on " << split_name << ": accuracy " << met.accuracy() << ", precision " << met.precision()
                << ", recall " << met.recall() << '\n';
    }
  }
}

struct WitnessArgs {
  std::string model;
  std::int64_t cap = witness::kDefaultDimensionCap;
};

void cmd_witness(const Global& g, const WitnessArgs& a, Stamp stamp) {
  stamp.inputs["model"] = file_digest(a.model);
  svm::SvmModel model;
  try {
    model = svm::load_model(a.model);
  } catch (const std::runtime_error& e) {
    throw InvalidInput(e.what());
  }
  const int nq = svm::qubits_for_feature_dimension(model.feature_dimension());
  if (nq < 1 || nq > 3) throw InvalidInput("model feature dimension does not correspond to 1-3 qubits");
  witness::WitnessOperator w;
  try {
    w = witness::build_witness(model, witness::feature_dual_basis(nq), a.cap);
  } catch (const witness::DimensionCapExceeded& e) {
    throw InvalidInput(e.what());
  }
  ensure_dir(g.out);
  const auto path = join_path(g.out, "witness.bin");
  witness::save_witness(w, path, hex_digest(svm::model_hash(model)));
  // Add run provenance to the metadata written next to the payload.
  std::ifstream meta_in(path + ".json");
  auto meta = nlohmann::json::parse(meta_in);
  meta_in.close();
  meta["provenance"] = stamp.json();
  open_out(path + ".json") << meta.dump(2) << '\n';
  std::cout << "wrote " << path << " (dimension " << w.dimension() << ", " << w.copies << " copies)\n";
}

struct SimulateArgs {
  std::string witness;
  std::string data;
  std::string states;  // sidecar for --data, optional
  std::vector<std::size_t> rows;
  int random = 0;
  std::vector<double> t{1e-2, 1e-3};
  long shots = 0;
};

void cmd_simulate(const Global& g, const SimulateArgs& a, Stamp stamp) {
  stamp.inputs["witness"] = file_digest(a.witness);
  witness::WitnessOperator w;
  try {
    w = witness::load_witness(a.witness);
  } catch (const std::runtime_error& e) {
    throw InvalidInput(e.what());
  }
  if (a.t.empty()) throw InvalidInput("--t needs at least one value");
  for (double t : a.t)
    if (t == 0.0) throw InvalidInput("--t values must be nonzero");

  std::vector<std::pair<std::string, qstate::DensityMatrix>> states;
  if (!a.data.empty()) {
    stamp.inputs["data"] = file_digest(a.data);
    datagen::LabeledDataset ds;
    try {
      ds = datagen::load_dataset(a.data, a.states);
    } catch (const datagen::DatasetFormatError& e) {
      throw InvalidInput(e.what());
    }
    if (ds.n_qubits != w.n_qubits) throw InvalidInput("dataset and witness act on different qubit counts");
    std::vector<std::size_t> rows = a.rows;
    if (rows.empty())
      for (std::size_t i = 0; i < std::min<std::size_t>(ds.rows.size(), 10); ++i) rows.push_back(i);
    for (std::size_t i : rows) {
      if (i >= ds.rows.size()) throw InvalidInput("row " + std::to_string(i) + " is out of range");
      const CMatrix m = ds.rows[i].state ? *ds.rows[i].state : datagen::matrix_from_features(ds.rows[i].x, ds.n_qubits);
      states.emplace_back("row" + std::to_string(i), qstate::DensityMatrix::repaired(ds.n_qubits, m));
    }
  }
  for (int i = 0; i < a.random; ++i) {
    Rng rng(g.seed, 0x5100000000ULL + static_cast<std::uint64_t>(i));
    states.emplace_back("ginibre" + std::to_string(i), qstate::sample_ginibre_state(w.n_qubits, rng));
  }
  if (states.empty()) throw InvalidInput("no states to simulate: pass --data and/or --random");

  ensure_dir(g.out);
  auto csv = open_out(join_path(g.out, "simulate.csv"));
  csv << stamp.csv_comment() << '\n' << "state,t,p0,p1,estimate,exact,abs_error,shots,ones,stderr\n";
  nlohmann::json records = nlohmann::json::array();
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& [name, rho] = states[s];
    const double exact = qsim::exact_mean(w, rho);
    for (std::size_t k = 0; k < a.t.size(); ++k) {
      Rng shot_rng(g.seed, 0x5200000000ULL + s * a.t.size() + k);
      const auto r = qsim::run_circuit(w, rho, a.t[k], a.shots, a.shots > 0 ? &shot_rng : nullptr);
      const auto e = qsim::estimate_mean(r);
      csv << name << ',' << csv_number(r.t) << ',' << csv_number(r.p0) << ',' << csv_number(r.p1) << ','
          << csv_number(e.value) << ',' << csv_number(exact) << ',' << csv_number(std::abs(e.value - exact)) << ','
          << (r.shots ? std::to_string(*r.shots) : "") << ',' << (r.ones ? std::to_string(*r.ones) : "") << ','
          << (e.stderr_value ? csv_number(*e.stderr_value) : "") << '\n';
      auto j = qsim::to_json(r, exact);
      j["state"] = name;
      records.push_back(std::move(j));
    }
  }
  nlohmann::json doc{{"provenance", stamp.json()}, {"records", std::move(records)}};
  open_out(join_path(g.out, "simulate.json")) << doc.dump(2) << '\n';
  std::cout << "simulated " << states.size() << " states at " << a.t.size() << " times\n";
}

// Quick end-to-end checks that need no input files.
int cmd_selftest(const Global& g) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    failures += ok ? 0 : 1;
  };
  const auto ghz = qstate::ghz_state();
  const auto w = qstate::w_state();
  check("three-tangle GHZ = 1, W = 0",
        std::abs(measures::three_tangle(ghz) - 1.0) < 1e-9 && std::abs(measures::three_tangle(w)) < 1e-9);
  check("GME-concurrence GHZ = sqrt 2, W = 4/3", std::abs(measures::gme_concurrence_pure(ghz) - std::sqrt(2.0)) < 1e-9 &&
                                                    std::abs(measures::gme_concurrence_pure(w) - 4.0 / 3.0) < 1e-9);

  datagen::TwoQubitOptions opt;
  opt.splits = {0.8, 0.1, 0.1};
  opt.threads = g.threads;
  const auto ds = datagen::sample_two_qubit_balanced(200, g.seed, opt);
  svm::TrainOptions t;
  t.degree = 2;
  const auto r = svm::train(ds.samples(datagen::Split::Train), ds.labels(datagen::Split::Train), t);
  check("SMO converged", r.model.training.converged);
  const auto op = witness::build_witness(r.model, witness::feature_dual_basis(2));
  Rng rng(g.seed, 99);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto rho = qstate::sample_ginibre_state(2, rng);
    worst = std::max(worst, std::abs(witness::evaluate_witness(op, rho) - svm::decide(r.model, datagen::features(rho))));
  }
  check("witness matches kernel decision", worst < 1e-9);
  const auto rho = qstate::sample_ginibre_state(2, rng);
  const double est = qsim::run_circuit(op, rho, 1e-3).estimate;
  check("circuit estimate tends to <W>/2", std::abs(est - qsim::exact_mean(op, rho) / 2.0) < 1e-4);
  return failures == 0 ? 0 : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement classification with kernel SVMs and witness operators"};
  app.set_config("--config", "", "Read options from a config file (e.g. a run_config.toml snapshot)");
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--profile", g.profile, "Size preset: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--strict", g.strict, "Exit with 3 when any training run hits the iteration cap");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a labelled dataset");
  c_gen->add_option("--kind", gen.kind, "two-qubit, sep-vs-all or gme-vs-all")
      ->check(CLI::IsMember({"two-qubit", "sep-vs-all", "gme-vs-all"}))
      ->capture_default_str();
  c_gen->add_option("--count", gen.count, "Rows per class (two-qubit) or in total (three-qubit); 0 = profile");
  c_gen->add_option("--splits", gen.splits, "Train, validation and test fractions")->expected(3);
  c_gen->add_option("--margin", gen.margin, "Certification margin for GME samples")->capture_default_str();
  c_gen->add_flag("--states", gen.states, "Also write the density matrices to dataset.states.bin");

  TrainArgs tr;
  auto add_train_options = [&](CLI::App* c) {
    c->add_option("--data", tr.data, "Dataset CSV")->required();
    c->add_option("--degrees", tr.degrees, "Kernel degrees (default: profile)");
    c->add_option("--lambda-plus", tr.lambda_plus, "Box bound of the entangled class (default: profile)");
    c->add_option("--tol", tr.tol, "SMO stopping tolerance")->capture_default_str();
    c->add_option("--cache-mb", tr.cache_mb, "Kernel row cache size")->capture_default_str();
    c->add_option("--max-iterations", tr.max_iterations, "SMO pair-update cap, 0 = automatic")->capture_default_str();
  };
  auto* c_train = app.add_subcommand("train", "Train one model per degree at a fixed lambda_minus");
  add_train_options(c_train);
  c_train->add_option("--lambda-minus", tr.lambda_minus, "Box bound of the separable class")->capture_default_str();
  auto* c_sweep = app.add_subcommand("sweep", "Sweep lambda_minus per degree and select on validation");
  add_train_options(c_sweep);
  c_sweep->add_option("--grid", tr.grid, "lambda_minus values (default: profile grid)");
  c_sweep->add_option("--p-min", tr.p_min, "Validation precision floor (default: profile)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate saved models on dataset splits");
  c_eval->add_option("--model", ev.models, "Model JSON files")->required();
  c_eval->add_option("--data", ev.data, "Dataset CSV")->required();
  c_eval->add_option("--split", ev.splits, "Splits to score")->capture_default_str();

  WitnessArgs wi;
  auto* c_wit = app.add_subcommand("witness", "Export the witness operator of a model");
  c_wit->add_option("--model", wi.model, "Model JSON")->required();
  c_wit->add_option("--cap", wi.cap, "Largest witness dimension to build")->capture_default_str();

  SimulateArgs si;
  auto* c_sim = app.add_subcommand("simulate", "Simulate the mean-value circuit for a witness");
  c_sim->add_option("--witness", si.witness, "Witness binary")->required();
  c_sim->add_option("--data", si.data, "Dataset CSV providing states");
  c_sim->add_option("--states", si.states, "State sidecar for --data (otherwise states come from features)");
  c_sim->add_option("--rows", si.rows, "Dataset rows to use (default: first 10)");
  c_sim->add_option("--random", si.random, "Number of extra random (Ginibre) states")->capture_default_str();
  c_sim->add_option("--t", si.t, "Evolution times")->capture_default_str();
  c_sim->add_option("--shots", si.shots, "Measurement shots per run, 0 for exact probabilities")->capture_default_str();

  auto* c_self = app.add_subcommand("selftest", "Run quick built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    Stamp stamp;
    stamp.seed = g.seed;
    const std::string snapshot = drop_empty_lists(app.config_to_str(true, false));
    stamp.config_hash = config_hash(snapshot);
    if (!c_self->parsed()) {
      ensure_dir(g.out);
      open_out(join_path(g.out, "run_config.toml")) << snapshot;
    }
    std::cerr << "seed " << g.seed << ", config " << stamp.config_hash << '\n';

    ConvergenceLog conv;
    if (c_gen->parsed()) cmd_gen(g, gen, stamp);
    if (c_train->parsed()) cmd_train(g, tr, stamp, conv);
    if (c_sweep->parsed()) cmd_sweep(g, tr, stamp, conv);
    if (c_eval->parsed()) cmd_eval(g, ev, stamp);
    if (c_wit->parsed()) cmd_witness(g, wi, stamp);
    if (c_sim->parsed()) cmd_simulate(g, si, stamp);
    if (c_self->parsed()) return cmd_selftest(g);
    if (!conv.failures.empty() && g.strict) {
      std::cerr << "error: " << conv.failures.size() << " training run(s) did not converge\n";
      return kExitNonConvergence;
    }
    return 0;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
