#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapt/certificate.hpp"
#include "mapt/io.hpp"
#include "mapt/model.hpp"
#include "mapt/reparam.hpp"
#include "mapt/sac.hpp"

namespace mapt {

enum class Method { sac, fr, fr1, none };

inline Method parse_method(const std::string& name) {
  if (name == "sac") return Method::sac;
  if (name == "fr") return Method::fr;
  if (name == "fr1") return Method::fr1;
  if (name == "none") return Method::none;
  throw std::invalid_argument("unknown method '" + name + "'");
}

struct RunConfig {
  Method method = Method::sac;
  double time_limit_seconds = 300;
  int ascent_passes_per_stage = 100;
  double eps0 = 0.1;
  int dmax0 = 3;
  std::string input_path;
  std::string input_format = "native";  // or "uai"
  std::string trace_path;
  bool certify = false;

  void validate() const {
    if (time_limit_seconds <= 0)
      throw std::invalid_argument("time limit must be positive");
    if (ascent_passes_per_stage < 1)
      throw std::invalid_argument("stage passes must be >= 1");
    if (eps0 <= 0) throw std::invalid_argument("eps must be positive");
    if (dmax0 < 1) throw std::invalid_argument("dmax must be >= 1");
    if (input_format != "native" && input_format != "uai")
      throw std::invalid_argument("unknown format '" + input_format + "'");
  }
};

struct BoundTrace {
  struct Row {
    double seconds = 0;
    double bound = 0;
    int triplets = 0;
    int stage = 0;
    double eps = 0;
    int dmax = 0;
  };
  std::vector<Row> rows;
  std::vector<std::pair<int, bool>> certifications;  // (stage, verified)
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

// Dual ascent with a cooperative deadline check between passes.
inline void ascend(Relaxation& m, int max_passes, const Stopwatch& watch,
                   double deadline) {
  double prev = lower_bound(m);
  int stalled = 0;
  for (int p = 0; p < max_passes; ++p) {
    diffusion_pass(m);
    double phi = lower_bound(m);
    stalled = phi - prev < 1e-9 ? stalled + 1 : 0;
    if (stalled >= 2 || watch.seconds() > deadline) break;
    prev = phi;
  }
}

// One verified certificate per stage: the first (r, s) whose raw-CSP
// probe wipes out.
inline std::pair<bool, bool> certify_any(const Relaxation& m, double eps) {
  for (int r = 0; r < m.num_vars(); ++r)
    for (int s = 0; s < m.domain_sizes[r]; ++s) {
      CspInstance csp = build_csp(m, eps);
      if (!csp.domains[r][s]) continue;
      CertifyOutcome out = certify(m, r, s, eps);
      if (out.wipeout) return {true, out.report.passed()};
    }
  return {false, false};
}

}  // namespace detail

inline BoundTrace run_on_model(Relaxation& m, const RunConfig& config) {
  config.validate();
  detail::Stopwatch watch;
  const double deadline = config.time_limit_seconds;
  BoundTrace trace;

  ScheduleState state;
  state.eps = config.eps0;
  state.d_max = config.dmax0;

  auto triplet_count = [&] {
    return static_cast<int>(m.triplet_factor_ids().size());
  };
  auto push_row = [&](int stage) {
    trace.rows.push_back({watch.seconds(), lower_bound(m), triplet_count(),
                          stage, state.eps, state.d_max});
  };

  detail::ascend(m, config.ascent_passes_per_stage, watch, deadline);
  push_row(0);
  if (config.method == Method::none) return trace;

  TripletFinder finder =
      config.method == Method::sac
          ? sac_finder()
          : fr_finder(config.method == Method::fr ? CycleVariant::fr
                                                  : CycleVariant::fr1);
  for (int stage = 1; watch.seconds() <= deadline; ++stage) {
    TripletSet found = schedule_step(state, m, finder);
    int added = 0;
    for (const auto& t : found.genuine)
      if (m.find_factor({t[0], t[1], t[2]}) < 0) {
        add_triplet(m, t);
        ++added;
      }
    if (config.method == Method::sac && config.certify) {
      auto [have, ok] = detail::certify_any(m, state.eps);
      if (have) trace.certifications.emplace_back(stage, ok);
    }
    detail::ascend(m, config.ascent_passes_per_stage, watch, deadline);
    push_row(stage);
    if (added == 0) break;
  }
  return trace;
}

inline BoundTrace run(const RunConfig& config) {
  config.validate();
  std::ifstream in(config.input_path);
  if (!in) throw std::invalid_argument("cannot open " + config.input_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  Relaxation m = config.input_format == "uai" ? parse_uai(text)
                                              : parse_native(text);
  return run_on_model(m, config);
}

inline void emit_trace(const BoundTrace& trace, const std::string& path) {
  for (size_t i = 1; i < trace.rows.size(); ++i) {
    if (trace.rows[i].bound < trace.rows[i - 1].bound - 1e-9)
      throw std::invalid_argument("bound trace is not monotone");
    if (trace.rows[i].seconds < trace.rows[i - 1].seconds)
      throw std::invalid_argument("time trace is not monotone");
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "seconds,bound,triplets,stage,eps,dmax\n";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::string(buf);
  };
  for (const auto& row : trace.rows)
    out << num(row.seconds) << ',' << num(row.bound) << ',' << row.triplets
        << ',' << row.stage << ',' << num(row.eps) << ',' << row.dmax
        << '\n';
  if (!out) throw std::invalid_argument("write failure for " + path);
}

}  // namespace mapt
