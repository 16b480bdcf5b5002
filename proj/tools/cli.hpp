#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "CLI11.hpp"
#include "infwalk/infwalk.hpp"
#include "json.hpp"

namespace infwalk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Files staged under temporary names and renamed into place on commit.
/// Anything not committed is removed when the set is destroyed.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    std::error_code ec;
    for (const auto& f : staged_) fs::remove(f.temp, ec);
    if (!committed_)
      for (const auto& d : created_dirs_) fs::remove(d, ec);  // only succeeds when empty
  }

  /// Creates `dir` if needed; it is removed again on failure if it was created here.
  void ensure_directory(const fs::path& dir) {
    if (fs::exists(dir)) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "io.mkdir", "cannot create directory " + dir.string() + ": " + ec.message());
    created_dirs_.push_back(dir);
  }

  void stage(const fs::path& target, const std::string& content, bool binary = false) {
    if (target.has_parent_path() && !fs::exists(target.parent_path())) ensure_directory(target.parent_path());
    fs::path temp = target;
    temp += ".tmp." + std::to_string(::getpid());
    std::ofstream out(temp, binary ? std::ios::binary : std::ios::out);
    out << content;
    out.close();
    if (!out) throw Error(ErrorKind::Io, "io.write", "cannot write " + target.string());
    staged_.push_back({temp, target});
  }

  void commit() {
    for (const auto& f : staged_) {
      std::error_code ec;
      fs::rename(f.temp, f.target, ec);
      if (ec) throw Error(ErrorKind::Io, "io.rename", "cannot move output into " + f.target.string());
    }
    staged_.clear();
    committed_ = true;
  }

 private:
  struct Staged {
    fs::path temp;
    fs::path target;
  };
  std::vector<Staged> staged_;
  std::vector<fs::path> created_dirs_;
  bool committed_ = false;
};

inline std::string read_file(const fs::path& p, bool binary = false) {
  std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorKind::Io, "io.open", "cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string abs_path(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline Graph load_graph_dir(const fs::path& dir) {
  std::istringstream edges(read_file(dir / "edges.txt"));
  std::istringstream names(read_file(dir / "names.txt"));
  return read_canonical_graph(edges, names);
}

/// Replaces the extension of `p` with `ext`, or appends it when `p` has none.
inline fs::path sibling(const fs::path& p, const std::string& ext) {
  fs::path out = p;
  if (p.has_extension()) return out.replace_extension(ext);
  out += ext;
  return out;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

/// Stages the run manifest; `argv` is the fully resolved command line.
inline void stage_manifest(OutputSet& outputs, const fs::path& target, const Context& ctx,
                           const std::vector<std::string>& argv, const json& config, const std::vector<std::string>& inputs) {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  json m = {{"command", argv.front()}, {"argv", argv},   {"inputs", inputs},
            {"config", config},        {"version", kVersion}, {"duration_seconds", seconds}};
  outputs.stage(target, m.dump(2) + "\n");
}

// ---- subcommands ------------------------------------------------------------

struct PreprocessOptions {
  std::string edges, labels, out;
};

inline void cmd_preprocess(const PreprocessOptions& o, Context& ctx) {
  std::istringstream edge_text(read_file(o.edges));
  const Graph raw = load_edge_list(edge_text);
  LabeledDataset data;
  data.graph = raw;
  data.labels.assign(raw.num_nodes(), {});
  if (!o.labels.empty()) {
    std::istringstream label_text(read_file(o.labels));
    data = load_labels(label_text, raw);
  }
  const LabeledDataset lcc = largest_connected_component(data);
  validate_walkable(lcc.graph);

  OutputSet outputs;
  const fs::path dir(o.out);
  outputs.ensure_directory(dir);
  std::ostringstream edges, names;
  write_canonical_edges(edges, lcc.graph);
  write_node_names(names, lcc.graph);
  outputs.stage(dir / "edges.txt", edges.str());
  outputs.stage(dir / "names.txt", names.str());
  std::size_t labeled = 0;
  if (!o.labels.empty()) {
    std::ostringstream labels;
    write_labels(labels, lcc);
    outputs.stage(dir / "labels.txt", labels.str());
    labeled = static_cast<std::size_t>(std::count_if(lcc.labels.begin(), lcc.labels.end(), [](const auto& s) { return !s.empty(); }));
  }
  const json stats = {{"nodes", lcc.graph.num_nodes()},
                      {"edges", lcc.graph.num_edges()},
                      {"volume", lcc.graph.volume()},
                      {"labels", lcc.num_labels},
                      {"labeled_nodes", labeled},
                      {"input_nodes", raw.num_nodes()},
                      {"input_edges", raw.num_edges()}};
  outputs.stage(dir / "stats.json", stats.dump(2) + "\n");

  std::vector<std::string> argv{"preprocess", "--edges", abs_path(o.edges)};
  std::vector<std::string> inputs{abs_path(o.edges)};
  if (!o.labels.empty()) {
    argv.insert(argv.end(), {"--labels", abs_path(o.labels)});
    inputs.push_back(abs_path(o.labels));
  }
  argv.insert(argv.end(), {"--out", abs_path(o.out)});
  stage_manifest(outputs, dir / "manifest.json", ctx, argv, json::object(), inputs);
  outputs.commit();
  ctx.out << "nodes=" << lcc.graph.num_nodes() << " edges=" << lcc.graph.num_edges()
          << " volume=" << format_double(lcc.graph.volume()) << " labels=" << lcc.num_labels << '\n';
}

struct SpectrumOptions {
  std::string graph, out;
};

inline void cmd_spectrum(const SpectrumOptions& o, Context& ctx) {
  const Graph g = load_graph_dir(o.graph);
  const auto cache = decompose_graph(g);
  std::ostringstream csv;
  write_spectrum_csv(csv, cache);
  OutputSet outputs;
  outputs.stage(o.out, csv.str());
  const json config = {{"fiedler", fiedler_value(cache)}};
  stage_manifest(outputs, sibling(o.out, ".manifest.json"), ctx,
                 {"spectrum", "--graph", abs_path(o.graph), "--out", abs_path(o.out)}, config, {abs_path(o.graph)});
  outputs.commit();
  ctx.out << "fiedler=" << format_double(fiedler_value(cache)) << '\n';
}

inline RampKind parse_ramp(const std::string& s) {
  if (s == "r1") return RampKind::One;
  if (s == "reps") return RampKind::Epsilon;
  throw Error(ErrorKind::Usage, "config.ramp", "ramp must be r1 or reps");
}

inline const char* ramp_flag(RampKind r) { return r == RampKind::One ? "r1" : "reps"; }

struct PmiCompareOptions {
  std::string graph, out, ramp = "r1";
  int window = 10;
  double epsilon = std::exp(-36.0);
};

inline void cmd_pmi_compare(const PmiCompareOptions& o, Context& ctx) {
  const Graph g = load_graph_dir(o.graph);
  PmiConfig cfg;
  cfg.window = o.window;
  cfg.ramp = parse_ramp(o.ramp);
  cfg.epsilon = o.epsilon;
  cfg.validate();
  const auto exact = pmi_exact(g, cfg);
  const auto approx = pmi_approx(pmi_limit(g, decompose_graph(g)), cfg);
  const auto report = approx_error_report(exact, approx);
  OutputSet outputs;
  outputs.stage(o.out, to_json(report).dump(2) + "\n");
  const json config = {{"T", cfg.window}, {"b", 1.0}, {"epsilon", cfg.epsilon}, {"ramp", ramp_name(cfg.ramp)}};
  stage_manifest(outputs, sibling(o.out, ".manifest.json"), ctx,
                 {"pmi-compare", "--graph", abs_path(o.graph), "--T", std::to_string(cfg.window), "--ramp",
                  ramp_flag(cfg.ramp), "--epsilon", format_double(cfg.epsilon), "--out", abs_path(o.out)},
                 config, {abs_path(o.graph)});
  outputs.commit();
  ctx.out << "relative_frobenius_error=" << format_double(report.relative_frobenius_error)
          << " ramped_disagreement_fraction=" << format_double(report.ramped_disagreement_fraction) << '\n';
}

struct PmiEmpiricalOptions {
  std::string graph, out;
  int window = 10;
  std::size_t gamma = 80, length = 40;
  std::uint64_t seed = 0;
  bool csv = false;
};

inline void cmd_pmi_empirical(const PmiEmpiricalOptions& o, Context& ctx) {
  const Graph g = load_graph_dir(o.graph);
  WalkConfig w;
  w.window = o.window;
  w.walks_per_node = o.gamma;
  w.walk_length = o.length;
  w.seed = o.seed;
  w.validate();
  const auto empirical = empirical_pmi(g, w);
  PmiConfig exact_cfg;
  exact_cfg.window = o.window;
  const auto dev = max_abs_deviation(empirical, pmi_exact(g, exact_cfg));

  OutputSet outputs;
  std::ostringstream bin;
  write_matrix_binary(bin, empirical.values.matrix());
  outputs.stage(o.out, bin.str(), true);
  fs::path meta = o.out;
  meta += ".meta";
  outputs.stage(meta, pmi_sidecar(empirical));
  const json deviation = {{"max_abs_deviation", dev.max_abs}, {"compared_entries", dev.compared},
                          {"T", o.window},  {"gamma", o.gamma}, {"L", o.length}, {"seed", o.seed}};
  fs::path dev_path = o.out;
  dev_path += ".deviation.json";
  outputs.stage(dev_path, deviation.dump(2) + "\n");
  if (o.csv) {
    std::ostringstream csv;
    write_pmi_csv(csv, empirical);
    fs::path csv_path = o.out;
    csv_path += ".csv";
    outputs.stage(csv_path, csv.str());
  }
  std::vector<std::string> argv{"pmi-empirical", "--graph", abs_path(o.graph), "--T", std::to_string(o.window),
                                "--gamma", std::to_string(o.gamma), "--len", std::to_string(o.length),
                                "--seed", std::to_string(o.seed), "--out", abs_path(o.out)};
  if (o.csv) argv.push_back("--csv");
  fs::path manifest = o.out;
  manifest += ".manifest.json";
  stage_manifest(outputs, manifest, ctx, argv, deviation, {abs_path(o.graph)});
  outputs.commit();
  ctx.out << "max_abs_deviation=" << format_double(dev.max_abs) << " compared=" << dev.compared << '\n';
}

struct EmbedOptions {
  std::string graph, out, method = "infinitewalk", ramp = "reps";
  int window = 10;
  double quantile = 0.95;
  double epsilon = std::exp(-36.0);
  std::size_t dimension = 128;
  bool binary = false;
};

inline void cmd_embed(const EmbedOptions& o, Context& ctx) {
  const Graph g = load_graph_dir(o.graph);
  EmbedConfig cfg;
  cfg.method = parse_method(o.method);
  cfg.window = o.window;
  cfg.quantile = o.quantile;
  cfg.epsilon = o.epsilon;
  cfg.ramp = parse_ramp(o.ramp);
  cfg.dimension = o.dimension;
  const auto e = embed(g, cfg);

  OutputSet outputs;
  std::ostringstream text;
  write_embedding_text(text, e);
  outputs.stage(o.out, text.str());
  if (o.binary) {
    std::ostringstream bin;
    write_matrix_binary(bin, e.vectors);
    fs::path bin_path = o.out;
    bin_path += ".bin";
    outputs.stage(bin_path, bin.str(), true);
    bin_path += ".meta";
    outputs.stage(bin_path, embedding_sidecar(e));
  }
  std::vector<std::string> argv{"embed", "--graph", abs_path(o.graph), "--method", method_name(cfg.method),
                                "--T", std::to_string(cfg.window), "--q", format_double(cfg.quantile),
                                "--epsilon", format_double(cfg.epsilon), "--ramp", ramp_flag(cfg.ramp),
                                "--d", std::to_string(cfg.dimension), "--out", abs_path(o.out)};
  if (o.binary) argv.push_back("--binary");
  const json config = {{"method", method_name(cfg.method)}, {"T", cfg.window}, {"q", cfg.quantile},
                       {"epsilon", cfg.epsilon}, {"ramp", ramp_name(cfg.ramp)}, {"d", cfg.dimension}};
  fs::path manifest = o.out;
  manifest += ".manifest.json";
  stage_manifest(outputs, manifest, ctx, argv, config, {abs_path(o.graph)});
  outputs.commit();
  ctx.out << "nodes=" << e.num_nodes() << " d=" << e.dimension() << '\n';
}

struct EvaluateOptions {
  std::string embedding, labels, out, method_name;
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int repeats = 10;
  double C = 1.0;
  std::uint64_t seed = 0;
};

inline void cmd_evaluate(const EvaluateOptions& o, Context& ctx) {
  std::istringstream emb_text(read_file(o.embedding));
  const Embedding emb = read_embedding_text(emb_text);
  const Graph names_only = Graph::from_edges(emb.num_nodes(), {}, emb.node_names);
  std::istringstream label_text(read_file(o.labels));
  const LabeledDataset data = load_labels(label_text, names_only);
  EvalConfig cfg;
  cfg.train_ratios = o.ratios;
  cfg.repeats = o.repeats;
  cfg.C = o.C;
  cfg.seed = o.seed;
  const std::string method = o.method_name.empty() ? fs::path(o.embedding).stem().string() : o.method_name;
  const auto report = evaluate_sweep(emb, data, cfg, method);

  OutputSet outputs;
  std::ostringstream csv;
  write_eval_csv(csv, report);
  outputs.stage(o.out, csv.str());
  outputs.stage(sibling(o.out, ".json"), to_json(report).dump(2) + "\n");
  std::string ratios;
  for (double r : cfg.train_ratios) ratios += (ratios.empty() ? "" : ",") + format_double(r);
  const std::vector<std::string> argv{"evaluate", "--embedding", abs_path(o.embedding), "--labels", abs_path(o.labels),
                                      "--ratios", ratios, "--repeats", std::to_string(cfg.repeats),
                                      "--C", format_double(cfg.C), "--seed", std::to_string(cfg.seed),
                                      "--method-name", method, "--out", abs_path(o.out)};
  const json config = {{"ratios", cfg.train_ratios}, {"repeats", cfg.repeats}, {"C", cfg.C},
                       {"seed", cfg.seed}, {"convergence_tol", cfg.convergence_tol}, {"max_iters", cfg.max_iters}};
  stage_manifest(outputs, sibling(o.out, ".manifest.json"), ctx, argv, config,
                 {abs_path(o.embedding), abs_path(o.labels)});
  outputs.commit();
  for (const auto& row : report.rows)
    ctx.out << "ratio=" << format_double(row.ratio) << " micro_f1=" << format_double(row.micro_f1_mean)
            << " macro_f1=" << format_double(row.macro_f1_mean) << '\n';
}

int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

/// Re-runs the command recorded in a manifest, optionally redirecting --out.
inline int cmd_replay(const std::string& manifest_path, const std::string& out_override, std::ostream& out,
                      std::ostream& err) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation, "parse.manifest", std::string("malformed manifest: ") + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array())
    throw Error(ErrorKind::Validation, "parse.manifest", "manifest has no argv list");
  auto argv = m["argv"].get<std::vector<std::string>>();
  if (!out_override.empty()) {
    auto it = std::find(argv.begin(), argv.end(), "--out");
    if (it == argv.end() || std::next(it) == argv.end())
      throw Error(ErrorKind::Validation, "parse.manifest", "manifest argv has no --out");
    *std::next(it) = out_override;
  }
  return run(argv, out, err);
}

// ---- dispatch ---------------------------------------------------------------

inline int report_error(std::ostream& err, const std::string& code, const std::string& message, int status) {
  err << "infwalk: error=" << code << ' ' << message << '\n';
  return status;
}

/// Parses and executes one command line (without the program name).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph node embeddings from the Laplacian pseudoinverse", "infwalk"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  PreprocessOptions pre;
  auto* sc_pre = app.add_subcommand("preprocess", "load an edge list, keep the largest component, validate, write a graph directory");
  sc_pre->add_option("--edges", pre.edges, "edge list file")->required();
  sc_pre->add_option("--labels", pre.labels, "label file");
  sc_pre->add_option("--out", pre.out, "output directory")->required();

  SpectrumOptions spectrum;
  auto* sc_spectrum = app.add_subcommand("spectrum", "eigenvalues of the symmetrized transition matrix as CSV");
  sc_spectrum->add_option("--graph", spectrum.graph, "graph directory")->required();
  sc_spectrum->add_option("--out", spectrum.out, "output CSV")->required();

  PmiCompareOptions cmp;
  auto* sc_cmp = app.add_subcommand("pmi-compare", "approximation error of the limit-based PMI against the exact PMI");
  sc_cmp->add_option("--graph", cmp.graph, "graph directory")->required();
  sc_cmp->add_option("--T", cmp.window, "window size")->required();
  sc_cmp->add_option("--ramp", cmp.ramp, "r1 or reps")->capture_default_str();
  sc_cmp->add_option("--epsilon", cmp.epsilon, "ramp floor for reps");
  sc_cmp->add_option("--out", cmp.out, "output JSON")->required();

  PmiEmpiricalOptions emp;
  auto* sc_emp = app.add_subcommand("pmi-empirical", "PMI estimated from simulated random walks");
  sc_emp->add_option("--graph", emp.graph, "graph directory")->required();
  sc_emp->add_option("--T", emp.window, "window size")->required();
  sc_emp->add_option("--gamma", emp.gamma, "walks per node")->required();
  sc_emp->add_option("--len", emp.length, "vertices per walk")->required();
  sc_emp->add_option("--seed", emp.seed, "RNG seed (default 0)");
  sc_emp->add_option("--out", emp.out, "output binary matrix")->required();
  sc_emp->add_flag("--csv", emp.csv, "also write CSV (n <= 100)");

  EmbedOptions emb;
  auto* sc_emb = app.add_subcommand("embed", "node embeddings");
  sc_emb->add_option("--graph", emb.graph, "graph directory")->required();
  sc_emb->add_option("--method", emb.method, "infinitewalk|binlap|adjacency|limitraw")->capture_default_str();
  sc_emb->add_option("--T", emb.window, "window size (infinitewalk)")->capture_default_str();
  sc_emb->add_option("--q", emb.quantile, "quantile (binlap)")->capture_default_str();
  sc_emb->add_option("--epsilon", emb.epsilon, "ramp floor (infinitewalk)");
  sc_emb->add_option("--ramp", emb.ramp, "r1 or reps (infinitewalk)")->capture_default_str();
  sc_emb->add_option("--d", emb.dimension, "embedding dimension")->required();
  sc_emb->add_option("--out", emb.out, "output text file")->required();
  sc_emb->add_flag("--binary", emb.binary, "also write a binary dump");

  EvaluateOptions ev;
  auto* sc_ev = app.add_subcommand("evaluate", "multi-label classification sweep");
  sc_ev->add_option("--embedding", ev.embedding, "embedding text file")->required();
  sc_ev->add_option("--labels", ev.labels, "label file")->required();
  sc_ev->add_option("--ratios", ev.ratios, "training ratios")->delimiter(',');
  sc_ev->add_option("--repeats", ev.repeats, "random splits per ratio")->capture_default_str();
  sc_ev->add_option("--C", ev.C, "inverse regularization strength")->capture_default_str();
  sc_ev->add_option("--seed", ev.seed, "RNG seed (default 0)");
  sc_ev->add_option("--method-name", ev.method_name, "method column value (default: embedding file stem)");
  sc_ev->add_option("--out", ev.out, "output CSV")->required();

  std::string manifest, replay_out;
  auto* sc_replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  sc_replay->add_option("--manifest", manifest, "manifest JSON")->required();
  sc_replay->add_option("--out", replay_out, "redirect the primary output");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", e.what(), 2);
  }

  Context ctx{out, err};
  try {
    if (sc_pre->parsed()) cmd_preprocess(pre, ctx);
    else if (sc_spectrum->parsed()) cmd_spectrum(spectrum, ctx);
    else if (sc_cmp->parsed()) cmd_pmi_compare(cmp, ctx);
    else if (sc_emp->parsed()) cmd_pmi_empirical(emp, ctx);
    else if (sc_emb->parsed()) cmd_embed(emb, ctx);
    else if (sc_ev->parsed()) cmd_evaluate(ev, ctx);
    else if (sc_replay->parsed()) return cmd_replay(manifest, replay_out, out, err);
  } catch (const Error& e) {
    return report_error(err, e.code(), e.what(), exit_status(e.kind()));
  } catch (const std::bad_alloc&) {
    return report_error(err, "numerical.out_of_memory", "allocation failed", 4);
  } catch (const fs::filesystem_error& e) {
    return report_error(err, "io.filesystem", e.what(), 5);
  }
  return 0;
}

}  // namespace infwalk::cli
