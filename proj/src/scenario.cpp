#include "duality_lab/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace duality_lab {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "name",    "n",      "n_list", "phi",     "schedule", "t_final", "output_step", "dt",    "engine",
    "seed",    "k_list", "t_list", "samples", "x0_list",  "axis",    "phi_b",       "max_full_qubits"};

int line_at_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class Reader {
 public:
  Reader(std::string_view text, const std::string& source) : text_(text), source_(source) {}

  // Line of the occurrence-th appearance of "key" in the text (0 if absent).
  int line_of(std::string_view key, int occurrence = 0) const {
    const std::string quoted = fmt::format("\"{}\"", key);
    std::size_t pos = 0;
    for (int seen = 0;; ++seen) {
      pos = text_.find(quoted, pos);
      if (pos == std::string_view::npos) return 0;
      if (seen == occurrence) return line_at_offset(text_, pos);
      pos += quoted.size();
    }
  }

  [[noreturn]] void fail(const std::string& message, int line) const {
    if (line > 0) throw ConfigError(fmt::format("{}:{}: {}", source_, line, message), line);
    throw ConfigError(fmt::format("{}: {}", source_, message), 0);
  }
  [[noreturn]] void fail_at(std::string_view key, const std::string& message, int occurrence = 0) const {
    fail(message, line_of(key, occurrence));
  }

  double number(const Json& j, std::string_view key, int occurrence = 0) const {
    if (!j.is_number()) fail_at(key, fmt::format("'{}' must be a number", key), occurrence);
    return j.get<double>();
  }

  long long integer(const Json& j, std::string_view key) const {
    if (!j.is_number_integer()) fail_at(key, fmt::format("'{}' must be an integer", key));
    return j.get<long long>();
  }

  std::vector<double> numbers(const Json& j, std::string_view key, std::size_t exact_size = 0,
                              int occurrence = 0) const {
    if (!j.is_array()) fail_at(key, fmt::format("'{}' must be an array of numbers", key), occurrence);
    if (exact_size && j.size() != exact_size) {
      fail_at(key, fmt::format("'{}' must have exactly {} entries, found {}", key, exact_size, j.size()), occurrence);
    }
    std::vector<double> out;
    for (const auto& e : j) {
      if (!e.is_number()) fail_at(key, fmt::format("'{}' must contain only numbers", key), occurrence);
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const Json& j, std::string_view key) const {
    if (!j.is_array()) fail_at(key, fmt::format("'{}' must be an array of integers", key));
    std::vector<int> out;
    for (const auto& e : j) {
      if (!e.is_number_integer()) fail_at(key, fmt::format("'{}' must contain only integers", key));
      const auto value = e.get<long long>();
      if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
        fail_at(key, fmt::format("'{}' entry {} is out of range", key, value));
      }
      out.push_back(static_cast<int>(value));
    }
    return out;
  }

  std::array<double, 4> spinor(const Json& j, std::string_view key) const {
    const auto v = numbers(j, key, 4);
    const double norm2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3];
    if (std::abs(norm2 - 1.0) > 1e-9) {
      fail_at(key, fmt::format("'{}' is not normalized: |phi0|^2 + |phi1|^2 = {:.17g}", key, norm2));
    }
    return {v[0], v[1], v[2], v[3]};
  }

 private:
  std::string_view text_;
  std::string source_;
};

Spinor to_spinor(const std::array<double, 4>& a) {
  Spinor phi(Complex{a[0], a[1]}, Complex{a[2], a[3]});
  return phi / phi.norm();
}

bool same_segment(const Segment& a, const Segment& b) { return a.t_start == b.t_start && a.h0 == b.h0 && a.v == b.v; }

void check_sizes(const Reader& r, const Scenario& s) {
  const std::string key = s.n ? "n" : "n_list";
  for (int n : s.sizes()) {
    if (n < 2) r.fail_at(key, fmt::format("n = {} is too small; need at least 2 qubits", n));
    if (s.engine == Engine::full && n > s.max_full_qubits) {
      r.fail_at(key, fmt::format("n = {} exceeds the full-engine cap of {} qubits (raise max_full_qubits or use "
                                 "the symmetric engine)",
                                 n, s.max_full_qubits));
    }
  }
}

}  // namespace

Spinor Scenario::spinor() const { return to_spinor(phi); }

std::optional<Spinor> Scenario::spinor_b() const {
  if (!phi_b) return std::nullopt;
  return to_spinor(*phi_b);
}

Schedule Scenario::schedule() const { return Schedule(segments, horizon); }

std::vector<double> Scenario::grid() const { return uniform_grid(t_final, output_step); }

std::vector<int> Scenario::sizes() const {
  if (!n_list.empty()) return n_list;
  if (n) return {*n};
  return {};
}

std::vector<double> Scenario::check_times() const { return t_list.empty() ? grid() : t_list; }

bool Scenario::operator==(const Scenario& o) const {
  if (segments.size() != o.segments.size()) return false;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!same_segment(segments[i], o.segments[i])) return false;
  }
  return name == o.name && n == o.n && n_list == o.n_list && phi == o.phi && horizon == o.horizon &&
         t_final == o.t_final && output_step == o.output_step && dt == o.dt && engine == o.engine &&
         seed == o.seed && k_list == o.k_list && t_list == o.t_list && samples == o.samples &&
         x0_list == o.x0_list && axis == o.axis && phi_b == o.phi_b && max_full_qubits == o.max_full_qubits;
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  const Reader r(text, source);
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const int line = e.byte > 0 ? line_at_offset(text, e.byte - 1) : 0;
    r.fail(fmt::format("malformed JSON ({})", e.what()), line);
  }
  if (!root.is_object()) r.fail("top level must be a JSON object", 1);
  for (const auto& item : root.items()) {
    if (!kTopLevelKeys.count(item.key())) r.fail_at(item.key(), fmt::format("unknown key '{}'", item.key()));
  }
  auto require = [&](const char* key) -> const Json& {
    if (!root.contains(key)) r.fail(fmt::format("missing required key '{}'", key), 0);
    return root.at(key);
  };

  Scenario s;
  if (root.contains("name")) {
    if (!root["name"].is_string()) r.fail_at("name", "'name' must be a string");
    s.name = root["name"].get<std::string>();
  }

  if (root.contains("n") && root.contains("n_list")) r.fail_at("n_list", "give either 'n' or 'n_list', not both");
  if (root.contains("n")) {
    const auto n = r.integer(root["n"], "n");
    if (n < 2 || n > 1'000'000) r.fail_at("n", fmt::format("n = {} outside [2, 1000000]", n));
    s.n = static_cast<int>(n);
  } else if (root.contains("n_list")) {
    s.n_list = r.integers(root["n_list"], "n_list");
    if (s.n_list.empty()) r.fail_at("n_list", "'n_list' must not be empty");
    for (int n : s.n_list) {
      if (n < 2 || n > 1'000'000) r.fail_at("n_list", fmt::format("n = {} outside [2, 1000000]", n));
    }
  } else {
    r.fail("missing required key 'n' (or 'n_list')", 0);
  }

  s.phi = r.spinor(require("phi"), "phi");

  s.t_final = r.number(require("t_final"), "t_final");
  if (!(s.t_final >= 0.0)) r.fail_at("t_final", "'t_final' must be non-negative");

  const Json& sched = require("schedule");
  if (!sched.is_object()) r.fail_at("schedule", "'schedule' must be an object");
  for (const auto& item : sched.items()) {
    if (item.key() != "segments" && item.key() != "horizon") {
      r.fail_at(item.key(), fmt::format("unknown key '{}' in schedule", item.key()));
    }
  }
  if (!sched.contains("segments") || !sched["segments"].is_array() || sched["segments"].empty()) {
    r.fail_at("schedule", "'schedule.segments' must be a non-empty array");
  }
  int idx = 0;
  for (const auto& seg : sched["segments"]) {
    if (!seg.is_object()) r.fail_at("segments", fmt::format("segment {} must be an object", idx));
    for (const auto& item : seg.items()) {
      if (item.key() != "t_start" && item.key() != "h0" && item.key() != "v") {
        r.fail_at(item.key(), fmt::format("unknown key '{}' in segment {}", item.key(), idx));
      }
    }
    for (const char* key : {"t_start", "h0", "v"}) {
      if (!seg.contains(key)) r.fail_at("segments", fmt::format("segment {} is missing '{}'", idx, key));
    }
    Segment out;
    out.t_start = r.number(seg["t_start"], "t_start", idx);
    const auto h0 = r.numbers(seg["h0"], "h0", 3, idx);
    const auto v = r.numbers(seg["v"], "v", 3, idx);
    out.h0 = PauliVector(h0[0], h0[1], h0[2]);
    out.v = PauliVector(v[0], v[1], v[2]);
    s.segments.push_back(out);
    ++idx;
  }
  s.horizon = sched.contains("horizon") ? r.number(sched["horizon"], "horizon") : s.t_final;
  try {
    (void)s.schedule();
  } catch (const std::exception& e) {
    r.fail_at("schedule", fmt::format("invalid schedule: {}", e.what()));
  }
  if (s.t_final > s.horizon) {
    r.fail_at("t_final", fmt::format("t_final = {} exceeds the schedule horizon {}", s.t_final, s.horizon));
  }

  if (root.contains("output_step")) {
    s.output_step = r.number(root["output_step"], "output_step");
    if (!(s.output_step > 0.0)) r.fail_at("output_step", "'output_step' must be positive");
  } else {
    s.output_step = s.t_final > 0.0 ? s.t_final / 20.0 : 1.0;
  }
  if (root.contains("dt")) {
    s.dt = r.number(root["dt"], "dt");
    if (!(*s.dt > 0.0)) r.fail_at("dt", "'dt' must be positive");
  }
  if (root.contains("engine")) {
    if (!root["engine"].is_string()) r.fail_at("engine", "'engine' must be a string");
    try {
      s.engine = parse_engine(root["engine"].get<std::string>());
    } catch (const std::exception& e) {
      r.fail_at("engine", e.what());
    }
  }
  if (root.contains("seed")) {
    const Json& seed = root["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      r.fail_at("seed", "'seed' must be a non-negative integer");
    }
    s.seed = seed.get<std::uint64_t>();
  }
  if (root.contains("max_full_qubits")) {
    const auto cap = r.integer(root["max_full_qubits"], "max_full_qubits");
    if (cap < 2 || cap > 30) r.fail_at("max_full_qubits", "'max_full_qubits' must lie in [2, 30]");
    s.max_full_qubits = static_cast<int>(cap);
  }
  if (root.contains("k_list")) {
    s.k_list = r.integers(root["k_list"], "k_list");
    if (s.k_list.empty()) r.fail_at("k_list", "'k_list' must not be empty");
    for (int k : s.k_list) {
      if (k != 1 && k != 2) r.fail_at("k_list", fmt::format("k = {} unsupported; use 1 or 2", k));
    }
  }
  if (root.contains("t_list")) {
    s.t_list = r.numbers(root["t_list"], "t_list");
    for (std::size_t i = 0; i < s.t_list.size(); ++i) {
      const double t = s.t_list[i];
      if (!(t >= 0.0) || t > s.horizon) r.fail_at("t_list", fmt::format("t = {} outside [0, horizon]", t));
      if (i > 0 && t < s.t_list[i - 1]) r.fail_at("t_list", "'t_list' must be non-decreasing");
    }
  }
  if (root.contains("samples")) {
    const auto samples = r.integer(root["samples"], "samples");
    if (samples < 1 || samples > 10'000'000) r.fail_at("samples", "'samples' must lie in [1, 10^7]");
    s.samples = static_cast<int>(samples);
  }
  if (root.contains("x0_list")) {
    s.x0_list = r.numbers(root["x0_list"], "x0_list");
    for (double x : s.x0_list) {
      if (!(std::abs(x) <= 1.0)) r.fail_at("x0_list", fmt::format("x0 = {} outside [-1, 1]", x));
    }
  } else {
    s.x0_list = {-1.0, -0.5, 0.0, 0.5, 1.0};
  }
  if (root.contains("axis")) {
    const auto axis = r.integer(root["axis"], "axis");
    if (axis < 1 || axis > 3) r.fail_at("axis", "'axis' must be 1, 2 or 3");
    s.axis = static_cast<int>(axis);
  }
  if (root.contains("phi_b")) s.phi_b = r.spinor(root["phi_b"], "phi_b");

  check_sizes(r, s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open file", path.string()), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_json(const Scenario& s, int indent) {
  OrderedJson j;
  j["name"] = s.name;
  if (s.n_list.empty() && s.n) j["n"] = *s.n;
  else j["n_list"] = s.n_list;
  j["phi"] = s.phi;
  OrderedJson segments = OrderedJson::array();
  for (const auto& seg : s.segments) {
    OrderedJson o;
    o["t_start"] = seg.t_start;
    o["h0"] = {seg.h0[0], seg.h0[1], seg.h0[2]};
    o["v"] = {seg.v[0], seg.v[1], seg.v[2]};
    segments.push_back(o);
  }
  j["schedule"] = {{"segments", segments}, {"horizon", s.horizon}};
  j["t_final"] = s.t_final;
  j["output_step"] = s.output_step;
  if (s.dt) j["dt"] = *s.dt;
  j["engine"] = engine_name(s.engine);
  j["seed"] = s.seed;
  j["k_list"] = s.k_list;
  if (!s.t_list.empty()) j["t_list"] = s.t_list;
  j["samples"] = s.samples;
  j["x0_list"] = s.x0_list;
  j["axis"] = s.axis;
  if (s.phi_b) j["phi_b"] = *s.phi_b;
  j["max_full_qubits"] = s.max_full_qubits;
  return j.dump(indent);
}

}  // namespace duality_lab
