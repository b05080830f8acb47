// geomprob: command-line drivers for the experiments.
//
// Every subcommand writes JSON lines to stdout (the last line is the
// report) and optionally a CSV table to --out. Exit status: 0 for a pass or
// an inconclusive report, 1 for a fail verdict, 2 for usage and input errors.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geomprob/geomprob.hpp"

namespace {

using geomprob::ConvexBody;
using geomprob::Error;
using geomprob::ExperimentReport;
using geomprob::Point;
using geomprob::Seed;
using geomprob::Verdict;

struct Range {
  int lo = 0;
  int hi = 0;
};

/// "3" or "2..4".
Range parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw Error("");
      return {v, v};
    }
    const std::string a = s.substr(0, dots), b = s.substr(dots + 2);
    Range r{std::stoi(a, &used), 0};
    if (used != a.size()) throw Error("");
    r.hi = std::stoi(b, &used);
    if (used != b.size() || r.hi < r.lo) throw Error("");
    return r;
  } catch (const std::exception&) {
    throw Error("bad range '" + s + "' (expected N or LO..HI)");
  }
}

Point parse_point(const std::string& s) {
  std::vector<double> xs;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      xs.push_back(std::stod(item, &used));
      if (used != item.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("bad coordinate list '" + s + "'");
    }
  }
  if (xs.empty() || xs.size() > static_cast<std::size_t>(geomprob::kMaxDim)) throw Error("bad coordinate list '" + s + "'");
  return Point(std::span<const double>(xs));
}

/// Inline JSON text, or @path to read it from a file.
std::string json_argument(const std::string& arg) {
  if (arg.empty() || arg[0] != '@') return arg;
  std::ifstream in(arg.substr(1));
  if (!in) throw Error("cannot read " + arg.substr(1));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Seed resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return Seed{*flag};
  if (const char* env = std::getenv("GEOMPROB_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw Error("GEOMPROB_SEED must be an unsigned integer");
    return Seed{v};
  }
  return Seed{1};
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_metrics_csv(const std::string& path, const ExperimentReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : r.metrics) rows.push_back({k, fmt(v)});
  write_csv(path, {"metric", "value"}, rows);
}

int finish(const ExperimentReport& r, const std::string& out) {
  std::cout << r.to_json().dump() << "\n";
  if (!out.empty()) write_metrics_csv(out, r);
  return r.verdict == Verdict::kFail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random simplices, covariance determinants and symmetrization in convex bodies"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::optional<std::uint64_t> seed_flag;
  std::uint64_t n = 1000000;
  std::string out;
  bool json = true;
  app.add_option("--seed", seed_flag, "random seed (default: $GEOMPROB_SEED, else 1)");
  app.add_option("--n", n, "Monte Carlo sample count")->check(CLI::Range(std::uint64_t{1000}, std::uint64_t{1} << 40));
  app.add_option("--out", out, "also write a CSV table to this path");
  app.add_flag("--json", json, "JSON-lines output on stdout (always on)");

  std::string d_range = "1..6", k_range = "1..3";
  auto* exact_cmd = app.add_subcommand("exact-table", "closed-form moments and bounds");
  exact_cmd->add_option("--d", d_range, "dimension or range LO..HI");
  exact_cmd->add_option("--k", k_range, "moment order or range LO..HI");

  std::string body_json, pinned;
  int k = 1;
  auto* est_cmd = app.add_subcommand("estimate", "Monte Carlo moment of the random simplex volume");
  est_cmd->add_option("--body", body_json, "body JSON (or @file)")->required();
  est_cmd->add_option("--k", k, "moment order")->check(CLI::Range(1, 64));
  est_cmd->add_option("--pinned", pinned, "pin one vertex at x1,...,xd");

  std::string v_arg, f_name = "simplexvol";
  double t = 0.0, h = 0.0;
  auto* der_cmd = app.add_subcommand("derivative-check", "derivative formula vs finite differences");
  der_cmd->set_help_flag("--help", "Print this help message and exit");  // -h is taken by the step
  der_cmd->add_option("--body", body_json, "body JSON (or @file)")->required();
  der_cmd->add_option("--v", v_arg, "cut direction v1,...,vd")->required();
  der_cmd->add_option("--t", t, "cut position");
  der_cmd->add_option("--h", h, "finite difference step (default 0.02 (b - a))");
  der_cmd->add_option("--f", f_name, "one | coordsum | simplexvol | detcov")
      ->check(CLI::IsMember({"one", "coordsum", "simplexvol", "detcov"}));

  std::string poly_json, op = "steiner";
  double angle = 0.0, line = 0.0;
  auto* sym_cmd = app.add_subcommand("symmetrize", "Steiner symmetrization or Blaschke shaking of a polygon");
  sym_cmd->add_option("--poly", poly_json, "polygon JSON (or @file)")->required();
  sym_cmd->add_option("--op", op, "steiner | shake")->check(CLI::IsMember({"steiner", "shake"}));
  sym_cmd->add_option("--angle", angle, "Steiner axis direction in radians");
  sym_cmd->add_option("--line", line, "shake onto the line y = LINE");

  std::string x_arg;
  auto* plane_cmd = app.add_subcommand("plane-check", "pinned ratio pipeline for a polygon and boundary point");
  plane_cmd->add_option("--poly", poly_json, "polygon JSON (or @file)")->required();
  plane_cmd->add_option("--x", x_arg, "boundary point x,y")->required();

  int d = 4;
  double eps = 0.1;
  auto* cex_cmd = app.add_subcommand("counterexample", "E V of the half-ball with cone vs pinned at the apex");
  cex_cmd->add_option("--d", d, "dimension")->check(CLI::Range(2, geomprob::kMaxDim));
  cex_cmd->add_option("--eps", eps, "cone height")->check(CLI::PositiveNumber);

  std::string detcov_body = "simplex";
  int detcov_d = 3;
  auto* det_cmd = app.add_subcommand("detcov-counterexample", "det A monotonicity failure from a capped simplex");
  det_cmd->add_option("--body", detcov_body, "simplex | ball | square")->check(CLI::IsMember({"simplex", "ball", "square"}));
  det_cmd->add_option("--d", detcov_d, "dimension (simplex, ball)")->check(CLI::Range(2, geomprob::kMaxDim));

  int pairs = 50;
  auto* mono_cmd = app.add_subcommand("monotonicity-2d", "det A and E V on random nested polygon pairs");
  mono_cmd->add_option("--pairs", pairs, "number of nested pairs")->check(CLI::Range(1, 100000));

  std::string k0_range = "2..10";
  int k_max = 200;
  auto* k0_cmd = app.add_subcommand("k0-scan", "smallest k with moment ratio bound below 1");
  k0_cmd->add_option("--d", k0_range, "dimension or range LO..HI");
  k0_cmd->add_option("--k-max", k_max, "largest k to try")->check(CLI::Range(1, 100000));

  auto* d3_cmd = app.add_subcommand("d3-probe", "the open d = 3 case, evidence only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const Seed seed = resolve_seed(seed_flag);
    if (exact_cmd->parsed()) {
      const Range dr = parse_range(d_range), kr = parse_range(k_range);
      const auto rows = geomprob::exact_rows(dr.lo, dr.hi, kr.lo, kr.hi);
      std::vector<std::vector<std::string>> csv;
      for (const auto& row : rows) {
        nlohmann::ordered_json j{{"d", row.d},
                                 {"k", row.k},
                                 {"kappa", geomprob::round12(row.kappa)},
                                 {"ball_simplex_moment", geomprob::round12(row.simplex_moment)},
                                 {"ball_pinned_moment", geomprob::round12(row.pinned_moment)},
                                 {"busemann_min_ratio", geomprob::round12(row.busemann)}};
        j["moment_ratio_bound"] = row.ratio_bound ? nlohmann::ordered_json(geomprob::round12(*row.ratio_bound)) : nullptr;
        j["chain_bound"] = row.chain ? nlohmann::ordered_json(geomprob::round12(*row.chain)) : nullptr;
        std::cout << j.dump() << "\n";
        csv.push_back({std::to_string(row.d), std::to_string(row.k), fmt(row.simplex_moment), fmt(row.pinned_moment),
                       row.ratio_bound ? fmt(*row.ratio_bound) : "", row.chain ? fmt(*row.chain) : ""});
      }
      const ExperimentReport r = geomprob::exact_table(dr.lo, dr.hi, kr.lo, kr.hi);
      std::cout << r.to_json().dump() << "\n";
      if (!out.empty())
        write_csv(out,
                  {"d", "k", "ball_moment", "pinned_moment", "ratio_bound", "chain_bound"},
                  csv);
      return r.verdict == Verdict::kFail ? 1 : 0;
    }
    if (est_cmd->parsed()) {
      const ConvexBody body = geomprob::body_from_json_text(json_argument(body_json));
      std::optional<Point> x;
      if (!pinned.empty()) x = parse_point(pinned);
      ExperimentReport r = geomprob::estimate_report(body, k, n, seed, x);
      // flat object as documented for this subcommand
      nlohmann::ordered_json j{{"mean", geomprob::round12(r.at("mean"))},
                               {"stderr", geomprob::round12(r.at("stderr"))},
                               {"n", n},
                               {"k", k},
                               {"seed", seed.value},
                               {"wall_time_s", geomprob::round12(r.wall_time_s)}};
      std::cout << j.dump() << "\n";
      if (!out.empty()) write_metrics_csv(out, r);
      return 0;
    }
    if (der_cmd->parsed()) {
      const ConvexBody body = geomprob::body_from_json_text(json_argument(body_json));
      return finish(geomprob::derivative_check(body, parse_point(v_arg), t, h, f_name, n, seed), out);
    }
    if (sym_cmd->parsed()) {
      const ConvexBody poly = geomprob::body_from_json_text(json_argument(poly_json));
      if (!poly.as<geomprob::Polygon2D>()) throw Error("symmetrize needs a polygon body");
      const ConvexBody res = op == "steiner" ? geomprob::steiner_symmetrize(poly, angle) : geomprob::blaschke_shake(poly, line);
      nlohmann::json j = geomprob::body_to_json(res);
      for (auto& p : j["vertices"])
        for (auto& c : p) c = geomprob::round12(c.get<double>());
      std::cout << j.dump() << "\n";
      return 0;
    }
    if (plane_cmd->parsed()) {
      const ConvexBody poly = geomprob::body_from_json_text(json_argument(poly_json));
      if (!poly.as<geomprob::Polygon2D>()) throw Error("plane-check needs a polygon body");
      return finish(geomprob::plane_check(poly, parse_point(x_arg), n, seed), out);
    }
    if (cex_cmd->parsed()) return finish(geomprob::counterexample(d, eps, n, seed), out);
    if (det_cmd->parsed()) {
      if (detcov_body == "square") return finish(geomprob::detcov_square(n, seed), out);
      if (detcov_body == "ball") return finish(geomprob::detcov_ball(detcov_d), out);
      return finish(geomprob::detcov_simplex(detcov_d, n, seed), out);
    }
    if (mono_cmd->parsed()) return finish(geomprob::monotonicity_2d(pairs, n, seed), out);
    if (k0_cmd->parsed()) {
      const Range dr = parse_range(k0_range);
      return finish(geomprob::k0_scan(dr.lo, dr.hi, k_max), out);
    }
    if (d3_cmd->parsed()) return finish(geomprob::d3_probe(n, seed), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
