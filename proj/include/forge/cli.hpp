#pragma once

// Command-line front end. run() parses arguments, executes one subcommand
// and returns the process exit code: 0 success, 1 domain error (bad spec,
// infeasible request), 2 usage error or missing file.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forge/forge.hpp"
#include "json.hpp"

#ifndef FORGE_DEFAULT_DATA_DIR
#define FORGE_DEFAULT_DATA_DIR "data"
#endif

namespace forge::cli {

// ---------------------------------------------------------------------------
// Output

enum class Format { Table, Csv, Json };

inline Format parse_format(const std::string& s) {
  if (s == "table") return Format::Table;
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw DomainError("unknown format '" + s + "' (expected table, csv or json)");
}

struct Cell {
  std::string text;
  nlohmann::json value;
};

inline Cell str(const std::string& s) { return {s, s}; }
inline Cell num(double v, std::string text) { return {std::move(text), v}; }
inline Cell count(std::int64_t v) { return {std::to_string(v), v}; }
inline Cell kilo(double v) { return {format_kilo(v), v}; }
inline Cell mega(double v, int dec = 1) { return {format_mega(v, dec), v}; }
inline Cell percent(double frac) { return {fixed(100.0 * frac, 2) + "%", round_to(100.0 * frac, 6)}; }
inline Cell seconds(double s) { return {format_seconds(s), round_to(s, 6)}; }
inline Cell ratio(double r) { return {fixed(r, 1) + "x", round_to(r, 6)}; }
inline Cell empty() { return {"", nullptr}; }

struct Report {
  std::string title;
  std::vector<std::string> headers;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
};

inline void render_table(const Report& r, std::ostream& out) {
  if (!r.title.empty()) out << r.title << "\n";
  std::vector<std::size_t> width(r.headers.size(), 0);
  for (std::size_t i = 0; i < r.headers.size(); ++i) width[i] = r.headers[i].size();
  for (const auto& row : r.rows)
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], row[i].text.size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string c = i < cells.size() ? cells[i] : "";
      const std::string pad(width[i] - std::min(width[i], c.size()), ' ');
      if (i > 0) s += "  ";
      s += i == 0 ? c + pad : pad + c;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out << s << "\n";
  };
  line(r.headers);
  for (const auto& row : r.rows) {
    std::vector<std::string> cells;
    for (const auto& c : row) cells.push_back(c.text);
    line(cells);
  }
  for (const auto& n : r.notes) out << n << "\n";
}

inline void render_csv(const Report& r, std::ostream& out) {
  for (std::size_t i = 0; i < r.headers.size(); ++i) out << (i ? "," : "") << r.headers[i];
  out << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      const auto& v = row[i].value;
      if (v.is_string()) {
        const auto& t = v.get_ref<const std::string&>();
        if (t.find_first_of(",\"") == std::string::npos) {
          out << t;
        } else {
          out << '"';
          for (char c : t) out << (c == '"' ? "\"\"" : std::string(1, c));
          out << '"';
        }
      } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
                 std::abs(v.get<double>()) < 9e15) {
        out << static_cast<std::int64_t>(v.get<double>());
      } else if (!v.is_null()) {
        out << v.dump();
      }
    }
    out << "\n";
  }
}

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  if (!r.title.empty()) j["title"] = r.title;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < r.headers.size(); ++i) o[r.headers[i]] = row[i].value;
    j["rows"].push_back(o);
  }
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline void render(const std::vector<Report>& reports, Format f, std::ostream& out) {
  if (f == Format::Json) {
    if (reports.size() == 1) {
      out << to_json(reports[0]).dump(2) << "\n";
    } else {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& r : reports) a.push_back(to_json(r));
      out << a.dump(2) << "\n";
    }
    return;
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) out << "\n";
    if (f == Format::Csv) {
      if (reports.size() > 1 && !reports[i].title.empty()) out << "# " << reports[i].title << "\n";
      render_csv(reports[i], out);
    } else {
      render_table(reports[i], out);
    }
  }
}

// ---------------------------------------------------------------------------
// Helpers

inline std::vector<int> parse_int_list(const std::string& text, char sep = ',') {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(part, &pos));
      if (pos != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw DomainError("invalid integer list '" + text + "'");
    }
  }
  if (out.empty()) throw DomainError("empty integer list");
  return out;
}

inline IntRange parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DomainError("bounds must look like lo:hi, got '" + text + "'");
  const auto lo = parse_int_list(text.substr(0, colon));
  const auto hi = parse_int_list(text.substr(colon + 1));
  return {lo.front(), hi.front()};
}

inline std::string join(const std::vector<int>& v, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
  return s;
}

inline std::string data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FORGE_DATA_DIR"); env && *env) return env;
  return FORGE_DEFAULT_DATA_DIR;
}

inline std::string calib_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FORGE_CALIB_DIR"); env && *env) return env;
  return (std::filesystem::path(data_dir("")) / "calib").string();
}

// "HRN-5x5x3x(m=16)" -> "hrn-5x5x3x_m16"
inline std::string file_stem(const std::string& name) {
  std::string s;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || c == '.')
      s += static_cast<char>(std::tolower(u));
    else if (c == '(' || c == ',' || c == ' ')
      s += '_';
  }
  std::erase(s, '=');
  while (!s.empty() && s.back() == '_') s.pop_back();
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 2, "_m") == 0 || s[i] != '_' || out.empty() || out.back() != '_') out += s[i];
  }
  return out;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

inline Report profile_report(const NetworkSpec& spec) {
  const auto p = profile(spec);
  Report r;
  r.title = spec.name;
  r.headers = {"stage", "blocks", "channels", "relus", "share", "flops", "params"};
  r.rows.push_back({str("stem"), empty(), count(spec.base_channels), kilo(static_cast<double>(p.stem_relus)), empty(),
                    mega(static_cast<double>(p.stem_flops), 2), count(p.stem_params)});
  for (std::size_t k = 0; k < spec.depth(); ++k)
    r.rows.push_back({str("S" + std::to_string(k + 1)), count(spec.stages[k].blocks), count(spec.stages[k].channels),
                      kilo(static_cast<double>(p.relus[k])), percent(p.relu_fraction[k]),
                      mega(static_cast<double>(p.flops[k]), 2), count(p.params[k])});
  r.rows.push_back({str("head"), empty(), count(spec.num_classes), kilo(0), empty(),
                    mega(static_cast<double>(p.head_flops), 2), count(p.head_params)});
  r.rows.push_back({str("total"), empty(), empty(), kilo(static_cast<double>(p.total_relus)), percent(1.0),
                    mega(static_cast<double>(p.total_flops), 2), count(p.total_params)});
  r.notes.push_back("Stage1 ReLUs include the stem ReLU; stage FLOPs cover block bodies only.");
  return r;
}

inline Report summary_report(const NetworkSpec& spec) {
  const auto p = profile(spec);
  Report r;
  r.title = spec.name;
  r.headers = {"metric", "value"};
  r.rows.push_back({str("relus"), kilo(static_cast<double>(p.total_relus))});
  r.rows.push_back({str("flops"), mega(static_cast<double>(p.total_flops))});
  r.rows.push_back({str("params"), mega(static_cast<double>(p.total_params), 2)});
  std::string dist;
  for (std::size_t k = 0; k < p.relu_fraction.size(); ++k)
    dist += (k ? " " : "") + ("S" + std::to_string(k + 1) + "=" + fixed(100 * p.relu_fraction[k], 2) + "%");
  r.rows.push_back({str("distribution"), str(dist)});
  return r;
}

inline void print_summary(const NetworkSpec& spec, std::ostream& out) {
  const auto p = profile(spec);
  out << spec.name << "\n";
  out << "  " << format_kilo(static_cast<double>(p.total_relus)) << " ReLUs\n";
  out << "  " << format_mega(static_cast<double>(p.total_flops)) << " FLOPs\n";
  out << "  " << format_mega(static_cast<double>(p.total_params), 2) << " params\n";
  out << "  ReLU distribution:";
  for (std::size_t k = 0; k < p.relu_fraction.size(); ++k)
    out << " S" << k + 1 << "=" << fixed(100 * p.relu_fraction[k], 2) << "%";
  out << "\n";
}

inline Report cost_report(const std::string& title, const CostEstimate& e) {
  Report r;
  r.title = title;
  r.headers = {"component", "value"};
  r.rows.push_back({str("gc_latency"), seconds(e.gc_seconds)});
  r.rows.push_back({str("he_latency"), seconds(e.he_seconds)});
  r.rows.push_back({str("total_latency"), seconds(e.total_seconds)});
  r.rows.push_back({str("gc_storage"), {format_gib(e.storage_bytes), e.storage_bytes}});
  if (e.he_extrapolated) r.notes.push_back("HE latency extrapolated beyond the calibrated FLOP range.");
  return r;
}

inline Report points_report(const std::string& title, const std::vector<DesignPoint>& pts) {
  Report r;
  r.title = title;
  r.headers = {"label", "relus", "flops", "acc", "latency"};
  for (const auto& p : pts)
    r.rows.push_back({str(p.label), kilo(p.relus), mega(p.flops),
                      p.accuracy ? num(*p.accuracy, fixed(*p.accuracy, 2)) : empty(),
                      p.cost ? seconds(p.cost->total_seconds) : empty()});
  return r;
}

inline Report comparison_report(const std::string& title, const std::vector<ComparisonRow>& rows) {
  Report r;
  r.title = title;
  r.headers = {"baseline", "b_relus", "b_flops", "b_acc", "b_he", "b_gc", "b_lat", "ours", "o_relus", "o_flops",
               "o_acc", "o_he", "o_gc", "o_lat", "relu_x", "flop_x", "acc_delta", "he_x", "gc_x", "lat_x"};
  auto side = [](const DesignPoint& p, std::vector<Cell>& row) {
    row.push_back(str(p.label));
    row.push_back(kilo(p.relus));
    row.push_back(mega(p.flops));
    row.push_back(p.accuracy ? num(*p.accuracy, fixed(*p.accuracy, 2)) : empty());
    row.push_back(seconds(p.cost->he_seconds));
    row.push_back(seconds(p.cost->gc_seconds));
    row.push_back(seconds(p.cost->total_seconds));
  };
  for (const auto& c : rows) {
    std::vector<Cell> row;
    side(c.baseline, row);
    side(c.ours, row);
    const auto& i = c.improvement;
    row.push_back(ratio(i.relu_ratio));
    row.push_back(ratio(i.flop_ratio));
    row.push_back(i.acc_delta ? num(*i.acc_delta, fixed(*i.acc_delta, 1)) : empty());
    row.push_back(ratio(i.he_ratio));
    row.push_back(ratio(i.gc_ratio));
    row.push_back(ratio(i.lat_ratio));
    r.rows.push_back(std::move(row));
  }
  return r;
}

// Manifest lines: "<spec path relative to the manifest's data dir> [plan steps]".
struct ManifestEntry {
  NetworkSpec spec;
  TransformPlan plan;
};

inline std::vector<ManifestEntry> load_manifest(const std::string& path, const std::string& base) {
  std::istringstream in(read_file(path));
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ls(line);
    std::string spec_path;
    if (!(ls >> spec_path) || spec_path.front() == '#') continue;
    std::string rest;
    std::getline(ls, rest);
    ManifestEntry e;
    e.spec = load_spec((std::filesystem::path(base) / spec_path).string());
    try {
      e.plan = TransformPlan::parse(rest);
    } catch (const DomainError& ex) {
      throw ParseError(path + ": " + ex.what(), n);
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline Report manifest_report(const std::string& title, const std::vector<ManifestEntry>& entries) {
  std::size_t d = 0;
  for (const auto& e : entries) d = std::max(d, e.spec.depth());
  Report r;
  r.title = title;
  r.headers = {"network", "plan"};
  for (std::size_t k = 0; k < d; ++k) r.headers.push_back("S" + std::to_string(k + 1));
  r.headers.push_back("relus");
  r.headers.push_back("flops");
  for (std::size_t k = 0; k < d; ++k) r.headers.push_back("S" + std::to_string(k + 1) + "_share");
  for (const auto& e : entries) {
    const auto spec = apply(e.spec, e.plan);
    const auto p = profile(spec);
    std::vector<Cell> row{str(e.spec.name), str(e.plan.to_string())};
    for (std::size_t k = 0; k < d; ++k) row.push_back(k < spec.depth() ? kilo(static_cast<double>(p.relus[k])) : empty());
    row.push_back(kilo(static_cast<double>(p.total_relus)));
    row.push_back(mega(static_cast<double>(p.total_flops)));
    for (std::size_t k = 0; k < d; ++k) row.push_back(k < spec.depth() ? percent(p.relu_fraction[k]) : empty());
    r.rows.push_back(std::move(row));
  }
  return r;
}

// Probe tables with network,m,mult columns: recompute each network's
// stagewise ReLUs and rank its stages.
inline Report probe_report(const std::string& title, const CsvTable& table, InputShape input, int classes) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const CsvRow*>> groups;
  for (const auto& row : table.rows) {
    const auto& net = row.text("network");
    if (!groups.count(net)) order.push_back(net);
    groups[net].push_back(&row);
  }
  Report r;
  r.title = title;
  r.headers = {"network", "S1", "S2", "S3", "S4", "listed_match", "order", "order_kd"};
  CsvTable sub;
  sub.header = table.header;
  for (const auto& net : order) {
    const auto& rows = groups[net];
    const int m = rows.front()->integer("m");
    const auto mult = parse_int_list(rows.front()->text("mult"), 'x');
    const auto spec = build_family(Family::resnet18(), m, ScalingMethod::stagewise(mult), input, classes);
    const auto relus = stage_relus(spec).per_stage;
    sub.rows.clear();
    bool match = true;
    for (const auto* row : rows) {
      sub.rows.push_back(*row);
      const auto k = static_cast<std::size_t>(row->integer("stage") - 1);
      if (k >= relus.size() || format_kilo(static_cast<double>(relus[k])) != format_kilo(row->number("relus")))
        match = false;
    }
    const auto probes = probes_from_csv(sub);
    std::vector<Cell> cells{str(net)};
    for (std::size_t k = 0; k < 4; ++k) cells.push_back(k < relus.size() ? kilo(static_cast<double>(relus[k])) : empty());
    cells.push_back(str(match ? "yes" : "no"));
    cells.push_back(str(rank(probes, false).to_string()));
    cells.push_back(str(rank(probes, true).to_string()));
    r.rows.push_back(std::move(cells));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesize and analyze ReLU-efficient residual networks for private inference", "forge"};
  app.require_subcommand(1);
  std::string format_name = "table";
  std::function<int()> action;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format_name, "Output format: table, csv or json")->capture_default_str();
  };

  // build
  auto* build = app.add_subcommand("build", "Construct a network spec and print it as JSON");
  std::string family_name = "resnet18", abg, input_name = "cifar", out_path, name_override;
  int m = 16, homogeneous = 0, width = 1, classes = 0;
  build->add_option("--family", family_name, "resnet18, resnet34, resnet<6n+2> or wrn<depth>x<k>")->capture_default_str();
  build->add_option("--m", m, "Base channels (stem output)")->capture_default_str();
  build->add_option("--abg", abg, "Stagewise channel multipliers, e.g. 5,5,3");
  build->add_option("--homogeneous", homogeneous, "Equal multiplier s for every stage transition");
  build->add_option("--width", width, "Uniform width multiplier")->capture_default_str();
  build->add_option("--input", input_name, "cifar, cifar10, tinyimagenet or HxWxC")->capture_default_str();
  build->add_option("--classes", classes, "Override the number of classes");
  build->add_option("--name", name_override, "Override the network name");
  build->add_option("-o,--output", out_path, "Write the spec to this file");
  build->callback([&] {
    action = [&] {
      auto ds = dataset_by_name(input_name);
      if (classes > 0) ds.num_classes = classes;
      const auto fam = Family::parse(family_name);
      if (!abg.empty() && homogeneous) throw DomainError("--abg and --homogeneous are mutually exclusive");
      const auto scaling = !abg.empty()  ? ScalingMethod::stagewise(parse_int_list(abg))
                           : homogeneous ? ScalingMethod::homogeneous(homogeneous)
                                         : ScalingMethod::uniform(width);
      auto spec = build_family(fam, m, scaling, ds.input, ds.num_classes);
      if (!name_override.empty()) spec.name = name_override;
      if (out_path.empty()) {
        out << serialize(spec);
      } else {
        save_spec(spec, out_path);
        out << "wrote " << out_path << "\n";
      }
      return 0;
    };
  });

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Stagewise ReLU, FLOP and parameter counts of a spec");
  std::string spec_path;
  bool per_stage = false;
  analyze->add_option("spec", spec_path, "Network spec (JSON)")->required();
  analyze->add_flag("--per-stage", per_stage, "Show the per-stage breakdown");
  add_format(analyze);
  analyze->callback([&] {
    action = [&] {
      const auto fmt = parse_format(format_name);
      const auto spec = load_spec(spec_path);
      if (per_stage)
        render({profile_report(spec)}, fmt, out);
      else if (fmt == Format::Table)
        print_summary(spec, out);
      else
        render({summary_report(spec)}, fmt, out);
      return 0;
    };
  });

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "Stage criticality order from probe accuracies");
  std::string probes_path;
  bool use_kd = false;
  rank_cmd->add_option("probes", probes_path, "CSV with stage,relus,acc[,acc_kd][,network]")->required();
  rank_cmd->add_flag("--kd", use_kd, "Rank by the acc_kd column");
  add_format(rank_cmd);
  rank_cmd->callback([&] {
    action = [&] {
      const auto fmt = parse_format(format_name);
      const auto table = load_csv(probes_path, {"stage", "relus", "acc"});
      const bool grouped = std::find(table.header.begin(), table.header.end(), "network") != table.header.end();
      Report r;
      r.headers = {"network", "order"};
      std::vector<std::string> names;
      std::map<std::string, CsvTable> groups;
      for (const auto& row : table.rows) {
        const std::string key = grouped ? row.text("network") : "";
        if (!groups.count(key)) {
          names.push_back(key);
          groups[key].header = table.header;
        }
        groups[key].rows.push_back(row);
      }
      if (!grouped && fmt == Format::Table) {
        out << rank(probes_from_csv(groups[""]), use_kd).to_string() << "\n";
        return 0;
      }
      for (const auto& n : names) r.rows.push_back({str(n), str(rank(probes_from_csv(groups[n]), use_kd).to_string())});
      render({r}, fmt, out);
      return 0;
    };
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Solve the ReLU-equalization inequalities");
  std::string backbone = "resnet18", blocks_arg, order_arg, mode_name = "width", lambda_bounds = "2:16",
              phi_bounds = "1:16", fixed_mult, select = "minimal", emit_dir;
  bool low_relu = false;
  synth->add_option("--backbone", backbone, "Backbone family providing block counts")->capture_default_str();
  synth->add_option("--blocks", blocks_arg, "Explicit block counts, e.g. 3,4,6,3");
  synth->add_option("--order", order_arg, "Criticality order, most critical first, e.g. 3,2,4,1")->required();
  synth->add_option("--mode", mode_name, "width, depth or mixed")->capture_default_str();
  synth->add_option("--lambda-bounds", lambda_bounds, "Multiplier bounds lo:hi")->capture_default_str();
  synth->add_option("--phi-bounds", phi_bounds, "Block-count bounds lo:hi")->capture_default_str();
  synth->add_option("--multipliers", fixed_mult, "Fixed multipliers for depth mode (default all 2)");
  synth->add_option("--select", select, "minimal (per group), pareto or all")->capture_default_str();
  synth->add_flag("--low-relu", low_relu, "Also list each selection with the first multiplier set to 2");
  synth->add_option("--emit-specs", emit_dir, "Write a JSON spec per selected network into this directory");
  synth->add_option("--m", m, "Base channels of emitted specs")->capture_default_str();
  synth->add_option("--input", input_name, "Input of emitted specs")->capture_default_str();
  add_format(synth);
  synth->callback([&] {
    action = [&] {
      const auto fmt = parse_format(format_name);
      const auto order = CriticalityOrder::parse(order_arg);
      const auto fam = Family::parse(backbone);
      const auto blocks = blocks_arg.empty() ? fam.blocks() : parse_int_list(blocks_arg);
      if (blocks.size() != order.size())
        throw DomainError("order lists " + std::to_string(order.size()) + " stages but the backbone has " +
                          std::to_string(blocks.size()));
      EqualizationProblem p;
      p.order = order;
      p.mode = parse_mode(mode_name);
      p.blocks = blocks;
      p.multipliers = fixed_mult.empty() ? std::vector<int>(blocks.size() - 1, 2) : parse_int_list(fixed_mult);
      p.lambda_bounds = parse_range(lambda_bounds);
      p.phi_bounds = parse_range(phi_bounds);
      p.check();
      const auto result = solve(p);
      std::string constraints;
      for (const auto& q : derive_inequalities(p)) constraints += (constraints.empty() ? "" : ", ") + q.to_string();
      if (!result.feasible()) {
        out << "constraints: " << constraints << "\n";
        out << "infeasible within bounds\n";
        return 1;
      }
      std::vector<EqualizationSolution> chosen;
      if (select == "minimal")
        chosen = select_minimal(result);
      else if (select == "pareto")
        chosen = pareto_minimal(result);
      else if (select == "all")
        chosen = result.solutions;
      else
        throw DomainError("unknown selection '" + select + "' (expected minimal, pareto or all)");
      if (low_relu) {
        const auto n = chosen.size();
        for (std::size_t i = 0; i < n; ++i) {
          auto v = low_relu_variant(chosen[i]);
          if (std::find(chosen.begin(), chosen.end(), v) == chosen.end()) chosen.push_back(v);
        }
      }
      const std::string suffix = blocks_arg.empty() && fam.kind != FamilyKind::ResNet18 ? fam.name() : "";
      Report r;
      r.title = "constraints: " + constraints;
      r.headers = {"network", "multipliers", "blocks", "feasible"};
      const auto ds = dataset_by_name(input_name);
      if (!emit_dir.empty()) ensure_dir(emit_dir);
      for (const auto& s : chosen) {
        std::string name = s.name();
        if (p.free_phi()) name += " phi=" + join(s.blocks, ",");
        r.rows.push_back({str(name), str(join(s.multipliers, "x")), str(join(s.blocks, ",")),
                          str(satisfies_chain(s, order) ? "yes" : "no")});
        if (!emit_dir.empty()) {
          auto spec = synthesize(s, m, ds.input, ds.num_classes, p.free_phi() ? "phi" + join(s.blocks, "-") : suffix);
          save_spec(spec, (std::filesystem::path(emit_dir) / (file_stem(spec.name) + ".json")).string());
        }
      }
      r.notes.push_back(std::to_string(result.solutions.size()) + " feasible tuples within bounds");
      render({r}, fmt, out);
      return 0;
    };
  });

  // transform
  auto* transform = app.add_subcommand("transform", "Apply cull / thin / scale / reuse rewrites to a spec");
  std::string cull_arg, thin_arg, scale_arg;
  int reuse_n = 0;
  transform->add_option("spec", spec_path, "Network spec (JSON)")->required();
  transform->add_option("--order", order_arg, "Criticality order (default 3,2,4,1 for 4-stage networks)");
  transform->add_option("--cull", cull_arg, "auto or a stage number");
  auto* thin_opt = transform->add_option("--thin", thin_arg, "Stages to thin: list, 'all', or empty for the unculled ones")
                       ->expected(0, 1);
  transform->add_option("--scale", scale_arg, "Channel scale factor, e.g. 1/2");
  transform->add_option("--reuse", reuse_n, "ReLU-reuse factor N (2, 4, 8, 16)");
  transform->add_option("-o,--output", out_path, "Write the result to this file");
  transform->callback([&] {
    action = [&] {
      const auto spec = load_spec(spec_path);
      TransformPlan plan;
      std::vector<int> remaining(spec.depth());
      std::iota(remaining.begin(), remaining.end(), 1);
      if (!cull_arg.empty()) {
        int stage = 0;
        if (cull_arg == "auto") {
          const auto order = !order_arg.empty()   ? CriticalityOrder::parse(order_arg)
                             : spec.depth() == 4 ? CriticalityOrder{{3, 2, 4, 1}}
                                                 : throw DomainError("--cull auto needs --order for this network");
          order.check(spec.depth());
          if (dominates(spec, order.least_critical())) stage = order.least_critical();
        } else {
          stage = parse_int_list(cull_arg).front();
        }
        if (stage) {
          plan.steps.push_back({StepKind::Cull, {stage}, {}, 0, ""});
          std::erase(remaining, stage);
        }
      }
      if (thin_opt->count() > 0) {
        std::vector<int> stages = remaining;
        if (thin_arg == "all") {
          stages.resize(spec.depth());
          std::iota(stages.begin(), stages.end(), 1);
        } else if (!thin_arg.empty()) {
          stages = parse_int_list(thin_arg);
        }
        if (!stages.empty()) plan.steps.push_back({StepKind::Thin, stages, {}, 0, ""});
      }
      if (!scale_arg.empty()) plan.steps.push_back({StepKind::Scale, {}, Ratio::parse(scale_arg), 0, ""});
      if (reuse_n) plan.steps.push_back({StepKind::Reuse, {}, {}, reuse_n, ""});
      const auto result = apply(spec, plan);
      if (out_path.empty()) {
        out << serialize(result);
      } else {
        save_spec(result, out_path);
        const auto p = profile(result);
        out << plan.to_string() << ": " << format_kilo(static_cast<double>(p.total_relus)) << " ReLUs, "
            << format_mega(static_cast<double>(p.total_flops)) << " FLOPs -> " << out_path << "\n";
      }
      return 0;
    };
  });

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Generate the one-pass family of ReLU-optimized variants");
  std::string order_file;
  plan_cmd->add_option("spec", spec_path, "Network spec (JSON)")->required();
  plan_cmd->add_option("--order", order_arg, "Criticality order (default 3,2,4,1 for 4-stage networks)");
  plan_cmd->add_option("--order-file", order_file, "Probe CSV to rank stages from");
  plan_cmd->add_flag("--kd", use_kd, "Rank probes by acc_kd");
  plan_cmd->add_option("--emit-specs", emit_dir, "Write each variant's spec into this directory");
  add_format(plan_cmd);
  plan_cmd->callback([&] {
    action = [&] {
      const auto fmt = parse_format(format_name);
      const auto spec = load_spec(spec_path);
      CriticalityOrder order;
      if (!order_file.empty())
        order = rank(load_probes(order_file), use_kd);
      else if (!order_arg.empty())
        order = CriticalityOrder::parse(order_arg);
      else if (spec.depth() == 4)
        order = {{3, 2, 4, 1}};
      else
        throw DomainError("plan needs --order or --order-file for this network");
      const auto variants = generate_plan(spec, order);
      Report r;
      r.title = spec.name + " (order " + order.to_string() + ")";
      r.headers = {"plan", "relus", "flops", "he_flops"};
      if (!emit_dir.empty()) {
        ensure_dir(emit_dir);
        r.headers.push_back("file");
      }
      for (std::size_t i = 0; i < variants.size(); ++i) {
        const auto& v = variants[i];
        const auto he_flops = profile(v.spec, ReuseFlops::Ignore).total_flops;
        std::vector<Cell> row{str(v.plan.to_string()), kilo(static_cast<double>(v.profile.total_relus)),
                              mega(static_cast<double>(v.profile.total_flops)), mega(static_cast<double>(he_flops))};
        if (!emit_dir.empty()) {
          const auto file = (std::filesystem::path(emit_dir) / (file_stem(spec.name) + "_v" + std::to_string(i) + ".json")).string();
          save_spec(v.spec, file);
          row.push_back(str(file));
        }
        r.rows.push_back(std::move(row));
      }
      render({r}, fmt, out);
      return 0;
    };
  });

  // cost
  auto* cost = app.add_subcommand("cost", "Estimate private-inference latency and storage");
  std::string calib_flag, dataset, relus_arg, flops_arg;
  cost->add_option("spec", spec_path, "Network spec (JSON); or give --relus and --flops");
  cost->add_option("--relus", relus_arg, "ReLU count, e.g. 26.1K");
  cost->add_option("--flops", flops_arg, "FLOP count, e.g. 44.6M");
  cost->add_option("--calib", calib_flag, "Calibration directory (default $FORGE_CALIB_DIR or the shipped data)");
  cost->add_option("--dataset", dataset, "Anchor table: cifar100, tinyimagenet, ... (default from input size)");
  add_format(cost);
  cost->callback([&] {
    action = [&] {
      const auto fmt = parse_format(format_name);
      std::string ds = dataset;
      std::string title;
      double relus = 0, flops = 0;
      std::optional<NetworkSpec> spec;
      if (!spec_path.empty()) {
        spec = load_spec(spec_path);
        title = spec->name;
        if (ds.empty()) ds = spec->input.height >= 64 ? "tinyimagenet" : "cifar100";
      } else {
        if (relus_arg.empty() || flops_arg.empty()) throw CLI::ValidationError("cost needs a spec or both --relus and --flops");
        relus = parse_scaled(relus_arg);
        flops = parse_scaled(flops_arg);
        title = relus_arg + " ReLUs, " + flops_arg + " FLOPs";
      }
      if (ds.empty()) ds = "cifar100";
      const auto calib = load_calibration(calib_dir(calib_flag), ds);
      const auto e = spec ? estimate(*spec, calib) : estimate(relus, flops, calib);
      render({cost_report(title + " [" + normalize_dataset(ds) + "]", e)}, fmt, out);
      return 0;
    };
  });

  // pareto
  auto* pareto = app.add_subcommand("pareto", "Frontier of design points or baseline comparison rows");
  std::string ours_path, base_path, report_kind, objectives_arg = "relus,acc";
  pareto->add_option("ours", ours_path, "Results CSV: label,relus,flops_m,acc")->required();
  pareto->add_option("baseline", base_path, "Baseline results CSV (optional match column)");
  pareto->add_option("--calib", calib_flag, "Calibration directory");
  pareto->add_option("--dataset", dataset, "Anchor table name")->default_str("cifar100");
  pareto->add_option("--report", report_kind, "frontier or comparison (default: comparison when a baseline is given)");
  pareto->add_option("--objectives", objectives_arg, "Frontier axes: relus, flops, acc, latency")->capture_default_str();
  add_format(pareto);
  pareto->callback([&] {
    action = [&] {
      const auto fmt = parse_format(format_name);
      const std::string kind = !report_kind.empty() ? report_kind : base_path.empty() ? "frontier" : "comparison";
      auto ours = load_points(ours_path, PointSource::Ours);
      const auto calib = load_calibration(calib_dir(calib_flag), dataset.empty() ? "cifar100" : dataset);
      attach_costs(ours, calib);
      if (kind == "frontier") {
        std::vector<Objective> objs;
        std::stringstream ss(objectives_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) objs.push_back(parse_objective(tok));
        auto all = ours;
        if (!base_path.empty()) {
          auto base = load_points(base_path, PointSource::External);
          attach_costs(base, calib);
          all.insert(all.end(), base.begin(), base.end());
        }
        render({points_report("frontier (" + objectives_arg + ")", frontier(all, objs))}, fmt, out);
      } else if (kind == "comparison") {
        if (base_path.empty()) throw CLI::ValidationError("comparison needs a baseline CSV");
        auto base = load_points(base_path, PointSource::External);
        attach_costs(base, calib);
        render({comparison_report("comparison [" + normalize_dataset(dataset) + "]", compare_points(base, ours))}, fmt, out);
      } else {
        throw CLI::ValidationError("unknown report '" + kind + "' (expected frontier or comparison)");
      }
      return 0;
    };
  });

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate reference tables from the shipped data");
  std::string target, data_flag;
  reproduce->add_option("target", target,
                        "iso-relu, transform-chain, baselines, low-relu, basech-stagech, hrn-sweep, stage-trends, "
                        "pi-comparison")
      ->required();
  reproduce->add_option("--data", data_flag, "Data directory (default $FORGE_DATA_DIR or the shipped data)");
  add_format(reproduce);
  reproduce->callback([&] {
    action = [&] {
      const auto fmt = parse_format(format_name);
      namespace fs = std::filesystem;
      const fs::path data = data_dir(data_flag);
      const auto cifar = dataset_by_name("cifar100");
      std::vector<Report> reports;
      auto manifest = [&](const std::string& file, const std::string& title) {
        reports.push_back(manifest_report(title, load_manifest((data / "plans" / file).string(), data.string())));
      };
      if (target == "iso-relu") {
        manifest("iso_relu.txt", "iso-ReLU ResNet18 variants");
      } else if (target == "transform-chain") {
        manifest("transform_chain.txt", "ReLU-optimized HybReNets");
      } else if (target == "baselines") {
        manifest("baselines.txt", "baseline networks and equalized HybReNets");
      } else if (target == "low-relu") {
        manifest("low_relu.txt", "HybReNets with alpha=2");
      } else if (target == "basech-stagech") {
        reports.push_back(probe_report("stage probes, uniform and homogeneous scaling",
                                       load_csv((data / "probes" / "resnet18_basech_stagech.csv").string(),
                                                {"network", "m", "mult", "stage", "relus", "acc", "acc_kd"}),
                                       cifar.input, cifar.num_classes));
      } else if (target == "hrn-sweep") {
        reports.push_back(probe_report("stage probes, HybReNets",
                                       load_csv((data / "probes" / "hrn_alpha_sweep.csv").string(),
                                                {"network", "m", "mult", "stage", "relus", "acc", "acc_kd"}),
                                       cifar.input, cifar.num_classes));
      } else if (target == "stage-trends") {
        Report r;
        r.title = "normalized stage FLOPs and ReLUs (Stage1 = 64)";
        r.headers = {"multipliers", "F1", "F2", "F3", "F4", "R1", "R2", "R3", "R4"};
        for (const auto& t : std::vector<std::array<int, 3>>{
                 {2, 2, 2}, {3, 3, 3}, {4, 4, 4}, {6, 6, 6}, {5, 7, 2}, {7, 5, 2}, {6, 6, 2}, {5, 5, 3}}) {
          const auto p = normalized_profile(t[0], t[1], t[2]);
          std::vector<Cell> row{str(join({t[0], t[1], t[2]}, "x"))};
          for (double v : p.flops) row.push_back(num(v, fixed(v, 0)));
          for (double v : p.relus) row.push_back(num(v, fixed(v, 0)));
          r.rows.push_back(std::move(row));
        }
        reports.push_back(std::move(r));
      } else if (target == "pi-comparison") {
        for (const std::string ds : {"cifar100", "tinyimagenet"}) {
          const auto calib = load_calibration((data / "calib").string(), ds);
          auto ours = load_points((data / "results" / (ds + "_hrn.csv")).string(), PointSource::Ours);
          auto base = load_points((data / "results" / (ds + "_baselines.csv")).string(), PointSource::External);
          attach_costs(ours, calib);
          attach_costs(base, calib);
          reports.push_back(comparison_report("comparison [" + ds + "]", compare_points(base, ours)));
        }
      } else {
        throw CLI::ValidationError("unknown target '" + target + "'");
      }
      render(reports, fmt, out);
      return 0;
    };
  });

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "forge: " << e.what() << "\n";
    err << "Run with --help for usage.\n";
    return 2;
  }
  if (!action) return 2;
  try {
    return action();
  } catch (const IoError& e) {
    err << "forge: " << e.what() << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    err << "forge: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "forge: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "forge: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace forge::cli
