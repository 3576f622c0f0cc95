/* Copyright 2026 The pfsim Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pfsim/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pfsim/errors.h"

namespace pfsim {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::infer: return "infer";
    case Mode::train: return "train";
    case Mode::power: return "power";
    case Mode::dlrm: return "dlrm";
    case Mode::validate: return "validate";
    case Mode::sweep: return "sweep";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::infer, Mode::train, Mode::power, Mode::dlrm, Mode::validate, Mode::sweep}) {
    if (to_string(m) == text) return m;
  }
  throw ValidationError("mode: unknown value '" + std::string(text) +
                        "' (expected infer|train|power|dlrm|validate|sweep)");
}

const ModelSpec& RunConfig::model(const std::string& id) const {
  auto it = models.find(id);
  if (it == models.end()) throw ValidationError("unknown model id '" + id + "'");
  return it->second;
}

const SystemSpec& RunConfig::system(const std::string& id) const {
  auto it = systems.find(id);
  if (it == systems.end()) throw ValidationError("unknown system id '" + id + "'");
  return it->second;
}

namespace {

template <class T>
struct Tag {};

// Wraps one JSON object of the config. Reads record which keys were used so
// finish() can reject unknown keys; defaults are written back into the
// document so the normalized echo shows them.
class Node {
 public:
  Node(Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError((path_.empty() ? std::string("config") : path_) + ": " + msg);
  }

  std::string at(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_[key].is_null();
  }

  Json& raw(const std::string& key) {
    if (!has(key)) throw ValidationError(at(key) + ": required field is missing");
    return j_[key];
  }

  template <class T>
  T req(const std::string& key) {
    return convert(raw(key), at(key), Tag<T>{});
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (!has(key)) j_[key] = fallback;
    return convert(j_[key], at(key), Tag<T>{});
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    if (!has(key)) {
      j_[key] = nullptr;
      return std::nullopt;
    }
    return convert(j_[key], at(key), Tag<T>{});
  }

  Node child(const std::string& key) { return Node(raw(key), at(key)); }

  Node child_or_empty(const std::string& key) {
    if (!has(key)) j_[key] = Json::object();
    return Node(j_[key], at(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail("unknown field '" + it.key() + "'");
    }
  }

  Json& json() { return j_; }
  const std::string& path() const { return path_; }

  static double convert(const Json& v, const std::string& where, Tag<double>) {
    if (!v.is_number()) throw ValidationError(where + ": expected a number");
    return v.get<double>();
  }
  static std::int64_t convert(const Json& v, const std::string& where, Tag<std::int64_t>) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw ValidationError(where + ": expected an integer");
  }
  static int convert(const Json& v, const std::string& where, Tag<int>) {
    return static_cast<int>(convert(v, where, Tag<std::int64_t>{}));
  }
  static bool convert(const Json& v, const std::string& where, Tag<bool>) {
    if (!v.is_boolean()) throw ValidationError(where + ": expected true or false");
    return v.get<bool>();
  }
  static std::string convert(const Json& v, const std::string& where, Tag<std::string>) {
    if (!v.is_string()) throw ValidationError(where + ": expected a string");
    return v.get<std::string>();
  }
  template <class T>
  static std::vector<T> convert(const Json& v, const std::string& where, Tag<std::vector<T>>) {
    if (!v.is_array()) throw ValidationError(where + ": expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(convert(v[i], where + "[" + std::to_string(i) + "]", Tag<T>{}));
    }
    return out;
  }

 private:
  Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& where, const std::string& msg) {
  if (!ok) throw ValidationError(where + ": " + msg);
}

// Re-throws module validation errors with the config path in front.
template <class F>
void checked(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

Json curve_to_json(const EfficiencyCurve& c) {
  if (c.is_identity()) return "identity";
  Json points = Json::array();
  for (const auto& k : c.knots()) points.push_back({k.size, k.utilization});
  return {{"points", points}, {"floor", c.floor()}};
}

}  // namespace

Json model_to_json(const ModelSpec& m) {
  return {{"name", m.name},
          {"hidden_size", m.hidden_size},
          {"num_layers", m.num_layers},
          {"num_heads", m.num_heads},
          {"num_kv_heads", m.num_kv_heads},
          {"head_dim", m.head_dim},
          {"ffn_size", m.ffn_size},
          {"ffn_mat_count", m.ffn_mat_count},
          {"vocab_size", m.vocab_size},
          {"weight_dtype_bytes", m.weight_dtype_bytes},
          {"activation_dtype_bytes", m.activation_dtype_bytes},
          {"kv_dtype_bytes", m.kv_dtype_bytes},
          {"norm_has_bias", m.norm_has_bias},
          {"tied_embeddings", m.tied_embeddings}};
}

Json system_to_json(const SystemSpec& s) {
  Json peaks = Json::object();
  for (const auto& [dtype, peak] : s.processor.peak_matrix_flops) {
    peaks[std::string(to_string(dtype))] = peak;
  }
  Json tiers = Json::array();
  for (const MemoryTier& t : s.memory_tiers) {
    Json tier = {{"role", std::string(to_string(t.role))},
                 {"capacity", t.capacity},
                 {"bandwidth", t.bandwidth},
                 {"fixed_latency", t.fixed_latency},
                 {"cache_hit_rate", t.cache_hit_rate}};
    tier["backing_bandwidth"] = t.backing_bandwidth ? Json(*t.backing_bandwidth) : Json(nullptr);
    tiers.push_back(tier);
  }
  Json out = {{"name", s.name},
              {"processor",
               {{"peak_matrix_flops", peaks},
                {"peak_vector_flops", s.processor.peak_vector_flops},
                {"count", s.processor.count}}},
              {"memory_tiers", tiers},
              {"bandwidth_curve", curve_to_json(s.bandwidth_curve)},
              {"flops_curve", curve_to_json(s.flops_curve)}};
  if (s.network) {
    const NetworkSpec& n = *s.network;
    out["network"] = {{"link_bandwidth", n.link_bandwidth},
                      {"per_message_latency", n.per_message_latency},
                      {"gpus_per_tray", n.gpus_per_tray},
                      {"trays_per_rack", n.trays_per_rack},
                      {"racks", n.racks}};
    out["network"]["scale_out_bandwidth"] =
        n.scale_out_bandwidth ? Json(*n.scale_out_bandwidth) : Json(nullptr);
    out["network"]["scale_out_latency"] =
        n.scale_out_latency ? Json(*n.scale_out_latency) : Json(nullptr);
  } else {
    out["network"] = nullptr;
  }
  return out;
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("--override '" + std::string(assignment) + "': expected KEY=VALUE");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string seg = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (seg.empty()) throw ValidationError("--override '" + key + "': empty path segment");
    const bool last = dot == std::string::npos;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(seg, &used);
        if (used != seg.size()) throw std::invalid_argument(seg);
      } catch (const std::logic_error&) {
        throw ValidationError("--override '" + key + "': '" + seg + "' is not an array index");
      }
      if (idx >= node->size()) {
        throw ValidationError("--override '" + key + "': index " + seg + " is out of range");
      }
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) {
        throw ValidationError("--override '" + key + "': '" + seg + "' is inside a non-object");
      }
      node = &(*node)[seg];
    }
    if (last) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

namespace {

struct Parser {
  RunConfig cfg;
  std::filesystem::path base_dir;

  CostOptions parse_cost(Node& n) {
    CostOptions c;
    c.attention_scratch_passes = n.get<std::int64_t>("attention_scratch_passes", 2);
    require(c.attention_scratch_passes >= 0, n.at("attention_scratch_passes"), "must be >= 0");
    c.norm_residual_flops_per_element = n.get<double>("norm_residual_flops_per_element", 8.0);
    require(c.norm_residual_flops_per_element >= 0, n.at("norm_residual_flops_per_element"),
            "must be >= 0");
    c.logits_all_positions = n.get<bool>("logits_all_positions", false);
    c.include_embedding_reads = n.get<bool>("include_embedding_reads", false);
    return c;
  }

  void parse_options(Node& root) {
    Node n = root.child_or_empty("options");
    cfg.infer_options.cost = parse_cost(n);
    cfg.infer_options.reserve_fraction = n.get<double>("reserve_fraction", 0.0);
    require(cfg.infer_options.reserve_fraction >= 0 && cfg.infer_options.reserve_fraction < 1,
            n.at("reserve_fraction"), "must be in [0, 1)");
    cfg.infer_options.enforce_memory = n.get<bool>("enforce_memory", true);
    n.finish();
  }

  void parse_models(Node& root) {
    Node models = root.child_or_empty("models");
    for (auto it = models.json().begin(); it != models.json().end(); ++it) {
      const std::string id = it.key();
      const std::string where = models.at(id);
      models.has(id);
      Json& entry = it.value();
      require(entry.is_object(), where, "must be an object");
      if (entry.contains("preset")) {
        require(entry["preset"].is_string(), where + ".preset", "expected a string");
        Json expanded;
        checked(where + ".preset", [&] { expanded = model_to_json(model_preset(entry["preset"].get<std::string>())); });
        expanded["preset"] = entry["preset"];
        expanded.merge_patch(entry);
        entry = expanded;
      }
      Node n(entry, where);
      n.get<std::string>("preset", "");
      ModelSpec m;
      m.name = n.get<std::string>("name", id);
      m.hidden_size = n.req<std::int64_t>("hidden_size");
      m.num_layers = n.req<std::int64_t>("num_layers");
      m.num_heads = n.req<std::int64_t>("num_heads");
      m.num_kv_heads = n.get<std::int64_t>("num_kv_heads", m.num_heads);
      m.head_dim = n.get<std::int64_t>("head_dim", m.num_heads > 0 ? m.hidden_size / m.num_heads : 0);
      m.ffn_size = n.req<std::int64_t>("ffn_size");
      m.ffn_mat_count = n.get<std::int64_t>("ffn_mat_count", 3);
      m.vocab_size = n.req<std::int64_t>("vocab_size");
      m.weight_dtype_bytes = n.get<int>("weight_dtype_bytes", 2);
      m.activation_dtype_bytes = n.get<int>("activation_dtype_bytes", 2);
      m.kv_dtype_bytes = n.get<int>("kv_dtype_bytes", 2);
      m.norm_has_bias = n.get<bool>("norm_has_bias", false);
      m.tied_embeddings = n.get<bool>("tied_embeddings", false);
      n.finish();
      checked(where, [&] { m.validate(); });
      cfg.models[id] = m;
    }
  }

  EfficiencyCurve parse_curve(Node& parent, const std::string& key) {
    if (!parent.has(key)) {
      parent.json()[key] = "identity";
      return EfficiencyCurve::identity();
    }
    Json& v = parent.json()[key];
    const std::string where = parent.at(key);
    if (v.is_string()) {
      require(v.get<std::string>() == "identity", where,
              "expected \"identity\" or an object with csv or points");
      return EfficiencyCurve::identity();
    }
    Node n(v, where);
    const double floor = n.get<double>("floor", 0.0);
    EfficiencyCurve curve;
    if (n.has("csv")) {
      require(!n.json().contains("points") || n.json()["points"].is_null(), where,
              "give either csv or points, not both");
      n.has("points");
      std::filesystem::path p = n.req<std::string>("csv");
      if (p.is_relative()) p = base_dir / p;
      checked(where, [&] { curve = EfficiencyCurve::from_csv_file(p, floor); });
    } else {
      const Json& pts = n.raw("points");
      require(pts.is_array() && !pts.empty(), where + ".points", "expected [[size, utilization], ...]");
      std::vector<EfficiencyCurve::Knot> knots;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string pw = where + ".points[" + std::to_string(i) + "]";
        require(pts[i].is_array() && pts[i].size() == 2 && pts[i][0].is_number() &&
                    pts[i][1].is_number(),
                pw, "expected [size, utilization]");
        knots.push_back({pts[i][0].get<double>(), pts[i][1].get<double>()});
      }
      checked(where, [&] { curve = EfficiencyCurve(std::move(knots), floor); });
    }
    n.finish();
    return curve;
  }

  void parse_systems(Node& root) {
    Node systems = root.child_or_empty("systems");
    for (auto it = systems.json().begin(); it != systems.json().end(); ++it) {
      const std::string id = it.key();
      const std::string where = systems.at(id);
      systems.has(id);
      Json& entry = it.value();
      require(entry.is_object(), where, "must be an object");
      if (entry.contains("preset")) {
        require(entry["preset"].is_string(), where + ".preset", "expected a string");
        Json expanded;
        checked(where + ".preset", [&] { expanded = system_to_json(system_preset(entry["preset"].get<std::string>())); });
        expanded["preset"] = entry["preset"];
        expanded.merge_patch(entry);
        // merge_patch drops keys set to null; keep them visible in the echo.
        // A curve given by the user replaces the preset's curve wholesale.
        for (auto kv = entry.begin(); kv != entry.end(); ++kv) {
          if (kv.value().is_null() || kv.key() == "bandwidth_curve" || kv.key() == "flops_curve") {
            expanded[kv.key()] = kv.value();
          }
        }
        entry = expanded;
      }
      Node n(entry, where);
      n.get<std::string>("preset", "");
      SystemSpec s;
      s.name = n.get<std::string>("name", id);

      Node proc = n.child("processor");
      Node peaks = proc.child("peak_matrix_flops");
      for (auto p = peaks.json().begin(); p != peaks.json().end(); ++p) {
        Dtype d{};
        checked(peaks.at(p.key()), [&] { d = parse_dtype(p.key()); });
        s.processor.peak_matrix_flops[d] = peaks.req<double>(p.key());
      }
      peaks.finish();
      s.processor.peak_vector_flops = proc.req<double>("peak_vector_flops");
      s.processor.count = proc.get<std::int64_t>("count", 1);
      proc.finish();

      const Json& tiers = n.raw("memory_tiers");
      require(tiers.is_array(), n.at("memory_tiers"), "expected an array");
      for (std::size_t i = 0; i < n.json()["memory_tiers"].size(); ++i) {
        Node t(n.json()["memory_tiers"][i], n.at("memory_tiers") + "[" + std::to_string(i) + "]");
        MemoryTier tier;
        checked(t.at("role"), [&] { tier.role = parse_memory_role(t.req<std::string>("role")); });
        tier.capacity = t.req<double>("capacity");
        tier.bandwidth = t.req<double>("bandwidth");
        tier.fixed_latency = t.get<double>("fixed_latency", 0.0);
        tier.cache_hit_rate = t.get<double>("cache_hit_rate", 1.0);
        tier.backing_bandwidth = t.opt<double>("backing_bandwidth");
        t.finish();
        s.memory_tiers.push_back(tier);
      }

      if (n.has("network")) {
        Node net = n.child("network");
        NetworkSpec ns;
        ns.link_bandwidth = net.req<double>("link_bandwidth");
        ns.per_message_latency = net.get<double>("per_message_latency", 0.0);
        ns.gpus_per_tray = net.get<std::int64_t>("gpus_per_tray", s.processor.count);
        ns.trays_per_rack = net.get<std::int64_t>("trays_per_rack", 1);
        ns.racks = net.get<std::int64_t>("racks", 1);
        ns.scale_out_bandwidth = net.opt<double>("scale_out_bandwidth");
        ns.scale_out_latency = net.opt<double>("scale_out_latency");
        net.finish();
        s.network = ns;
      } else {
        n.json()["network"] = nullptr;
      }
      s.bandwidth_curve = parse_curve(n, "bandwidth_curve");
      s.flops_curve = parse_curve(n, "flops_curve");
      n.finish();
      checked(where, [&] { s.validate(); });
      cfg.systems[id] = s;
    }
  }

  std::string model_ref(Node& n, const std::string& key) {
    const std::string id = n.req<std::string>(key);
    require(cfg.models.count(id) > 0, n.at(key), "unknown model id '" + id + "'");
    return id;
  }

  std::string system_ref(Node& n, const std::string& key) {
    const std::string id = n.req<std::string>(key);
    require(cfg.systems.count(id) > 0, n.at(key), "unknown system id '" + id + "'");
    return id;
  }

  ParallelismPlan parse_plan(Node& parent, const std::string& key) {
    Node n = parent.child_or_empty(key);
    ParallelismPlan p;
    p.tp = n.get<std::int64_t>("tp", 1);
    p.pp = n.get<std::int64_t>("pp", 1);
    p.dp = n.get<std::int64_t>("dp", 1);
    p.microbatch = n.get<std::int64_t>("microbatch", 1);
    p.num_microbatches = n.get<std::int64_t>("num_microbatches", 1);
    p.sequence_parallel = n.get<bool>("sequence_parallel", false);
    p.dp_overlap = n.get<bool>("dp_overlap", false);
    n.finish();
    checked(n.path(), [&] { p.validate(); });
    return p;
  }

  void check_plan_devices(const ParallelismPlan& p, const std::string& system_id,
                          const std::string& where) {
    const std::int64_t count = cfg.systems.at(system_id).processor.count;
    require(p.devices() <= count, where,
            "tp*pp*dp = " + std::to_string(p.devices()) + " exceeds processor.count = " +
                std::to_string(count) + " of system '" + system_id + "'");
  }

  void check_model_plan(const std::string& model_id, const ParallelismPlan& p,
                        const std::string& where) {
    checked(where, [&] { check_shardable(cfg.models.at(model_id), p); });
  }

  WorkloadShape parse_shape(Node& n) {
    WorkloadShape s;
    s.batch = n.get<std::int64_t>("batch", 1);
    s.input_len = n.req<std::int64_t>("input_len");
    s.output_len = n.req<std::int64_t>("output_len");
    require(s.batch >= 1, n.at("batch"), "must be >= 1");
    require(s.input_len >= 1, n.at("input_len"), "must be >= 1");
    require(s.output_len >= 0, n.at("output_len"), "must be >= 0");
    return s;
  }

  std::vector<std::int64_t> positive_list(Node& n, const std::string& key) {
    auto v = n.req<std::vector<std::int64_t>>(key);
    require(!v.empty(), n.at(key), "must not be empty");
    for (auto x : v) require(x >= 1, n.at(key), "entries must be >= 1");
    return v;
  }

  void parse_infer(Node& root) {
    Node n = root.child("infer");
    if (n.has("runs")) {
      Json& runs = n.raw("runs");
      require(runs.is_array(), n.at("runs"), "expected an array");
      for (std::size_t i = 0; i < runs.size(); ++i) {
        Node r(runs[i], n.at("runs") + "[" + std::to_string(i) + "]");
        InferRun run;
        run.id = r.get<std::string>("id", "run" + std::to_string(i));
        run.model = model_ref(r, "model");
        run.system = system_ref(r, "system");
        run.plan = parse_plan(r, "plan");
        check_plan_devices(run.plan, run.system, r.at("plan"));
        check_model_plan(run.model, run.plan, r.at("plan"));
        run.shape = parse_shape(r);
        r.finish();
        cfg.infer_runs.push_back(run);
      }
    } else {
      n.json()["runs"] = Json::array();
    }
    if (n.has("speedup")) {
      Node s = n.child("speedup");
      SpeedupConfig sc;
      const Json& ms = s.raw("models");
      require(ms.is_array() && !ms.empty(), s.at("models"), "expected a non-empty array");
      for (const auto& id : s.req<std::vector<std::string>>("models")) {
        require(cfg.models.count(id) > 0, s.at("models"), "unknown model id '" + id + "'");
        sc.models.push_back(id);
      }
      Node b = s.child("baseline");
      sc.baseline_system = system_ref(b, "system");
      sc.baseline_plan = parse_plan(b, "plan");
      check_plan_devices(sc.baseline_plan, sc.baseline_system, b.at("plan"));
      b.finish();
      Node c = s.child("candidate");
      sc.candidate_system = system_ref(c, "system");
      sc.candidate_plan = parse_plan(c, "plan");
      check_plan_devices(sc.candidate_plan, sc.candidate_system, c.at("plan"));
      c.finish();
      for (const auto& id : sc.models) {
        check_model_plan(id, sc.baseline_plan, b.at("plan"));
        check_model_plan(id, sc.candidate_plan, c.at("plan"));
      }
      const Json& lens = s.raw("lengths");
      require(lens.is_array() && !lens.empty(), s.at("lengths"), "expected [[input, output], ...]");
      for (const auto& pair : lens) {
        require(pair.is_array() && pair.size() == 2 && pair[0].is_number_integer() &&
                    pair[1].is_number_integer() && pair[0].get<std::int64_t>() >= 1 &&
                    pair[1].get<std::int64_t>() >= 0,
                s.at("lengths"), "expected [[input, output], ...] with input >= 1");
        sc.lengths.push_back({pair[0].get<std::int64_t>(), pair[1].get<std::int64_t>()});
      }
      sc.compute_scales = s.get<std::vector<double>>("compute_scales", {1.0});
      for (double x : sc.compute_scales) require(x > 0, s.at("compute_scales"), "entries must be > 0");
      sc.batch_cap = s.opt<std::int64_t>("batch_cap");
      if (sc.batch_cap) require(*sc.batch_cap >= 1, s.at("batch_cap"), "must be >= 1");
      s.finish();
      cfg.speedup = sc;
    } else {
      n.json()["speedup"] = nullptr;
    }
    if (n.has("tp_overhead")) {
      Node t = n.child("tp_overhead");
      TpOverheadConfig tc;
      tc.model = model_ref(t, "model");
      tc.system = system_ref(t, "system");
      tc.shape = parse_shape(t);
      tc.tp = t.get<std::vector<std::int64_t>>("tp", {1, 2, 4, 8});
      require(std::find(tc.tp.begin(), tc.tp.end(), 1) != tc.tp.end(), t.at("tp"),
              "must include 1 as the baseline");
      for (std::int64_t tp : tc.tp) {
        ParallelismPlan p;
        p.tp = tp;
        checked(t.at("tp"), [&] { p.validate(); });
        check_plan_devices(p, tc.system, t.at("tp"));
        check_model_plan(tc.model, p, t.at("tp"));
      }
      t.finish();
      cfg.tp_overhead = tc;
    } else {
      n.json()["tp_overhead"] = nullptr;
    }
    if (n.has("intensity")) {
      Node a = n.child("intensity");
      IntensityConfig ic;
      ic.model = model_ref(a, "model");
      checked(a.at("phase"), [&] { ic.phase = parse_phase(a.get<std::string>("phase", "decode")); });
      require(ic.phase != Phase::train, a.at("phase"), "expected prefill or decode");
      ic.batches = positive_list(a, "batches");
      ic.lengths = positive_list(a, "lengths");
      a.finish();
      cfg.intensity = ic;
    } else {
      n.json()["intensity"] = nullptr;
    }
    n.finish();
    require(!cfg.infer_runs.empty() || cfg.speedup || cfg.tp_overhead || cfg.intensity, "infer",
            "needs at least one of runs, speedup, tp_overhead, intensity");
  }

  void parse_sweep(Node& root) {
    Node n = root.child("sweep");
    SweepConfig sc;
    Json& cases = n.raw("cases");
    require(cases.is_array() && !cases.empty(), n.at("cases"), "expected a non-empty array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      Node c(cases[i], n.at("cases") + "[" + std::to_string(i) + "]");
      SweepCase sw;
      sw.id = c.req<std::string>("id");
      require(ids.insert(sw.id).second, c.at("id"), "duplicate case id '" + sw.id + "'");
      sw.model = model_ref(c, "model");
      sw.system = system_ref(c, "system");
      sw.plan = parse_plan(c, "plan");
      check_plan_devices(sw.plan, sw.system, c.at("plan"));
      check_model_plan(sw.model, sw.plan, c.at("plan"));
      c.finish();
      sc.cases.push_back(sw);
    }
    sc.batches = positive_list(n, "batches");
    Json& sweeps = n.raw("length_sweeps");
    require(sweeps.is_array() && !sweeps.empty(), n.at("length_sweeps"),
            "expected a non-empty array");
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
      Node l(sweeps[i], n.at("length_sweeps") + "[" + std::to_string(i) + "]");
      LengthSweep ls;
      ls.name = l.get<std::string>("name", "sweep" + std::to_string(i));
      ls.input_lens = positive_list(l, "input_lens");
      ls.output_lens = positive_list(l, "output_lens");
      l.finish();
      sc.length_sweeps.push_back(ls);
    }
    n.finish();
    cfg.sweep = sc;
  }

  TrainConfig parse_train_node(Node& n) {
    TrainConfig tc;
    tc.model = model_ref(n, "model");
    tc.system = system_ref(n, "system");
    tc.options.seq_len = n.get<std::int64_t>("seq_len", 2048);
    require(tc.options.seq_len >= 1, n.at("seq_len"), "must be >= 1");
    tc.options.recompute_activations = n.get<bool>("recompute_activations", false);
    tc.options.mixed_precision = n.get<bool>("mixed_precision", true);
    tc.options.optimizer_bytes_mixed = n.get<double>("optimizer_bytes_mixed", 12.0);
    tc.options.optimizer_bytes_full = n.get<double>("optimizer_bytes_full", 8.0);
    tc.options.tp_training_passes = n.get<double>("tp_training_passes", 3.0);
    require(tc.options.optimizer_bytes_mixed >= 0 && tc.options.optimizer_bytes_full >= 0,
            n.path(), "optimizer bytes must be >= 0");
    require(tc.options.tp_training_passes >= 0, n.at("tp_training_passes"), "must be >= 0");
    tc.options.cost = cfg.infer_options.cost;

    const std::int64_t count = cfg.systems.at(tc.system).processor.count;
    const std::int64_t devices = n.get<std::int64_t>("devices", count);
    require(devices >= 1 && devices <= count, n.at("devices"),
            "must be in [1, processor.count = " + std::to_string(count) + "]");

    const bool has_plan = n.has("plan");
    const bool has_search = n.has("search");
    require(has_plan != has_search, n.path(), "give exactly one of plan or search");
    if (has_plan) {
      tc.plan = parse_plan(n, "plan");
      require(tc.plan->devices() == devices, n.at("plan"),
              "tp*pp*dp = " + std::to_string(tc.plan->devices()) + " must equal devices = " +
                  std::to_string(devices));
      check_model_plan(tc.model, *tc.plan, n.at("plan"));
      n.json()["search"] = nullptr;
    } else {
      Node s = n.child("search");
      tc.device_budget = devices;
      tc.search.global_batch = s.req<std::int64_t>("global_batch");
      require(tc.search.global_batch >= 1, s.at("global_batch"), "must be >= 1");
      tc.search.max_microbatch = s.get<std::int64_t>("max_microbatch", 16);
      require(tc.search.max_microbatch >= 1, s.at("max_microbatch"), "must be >= 1");
      tc.search.sequence_parallel = s.get<bool>("sequence_parallel", false);
      tc.search.dp_overlap = s.get<bool>("dp_overlap", false);
      tc.search.options = tc.options;
      s.finish();
      n.json()["plan"] = nullptr;
    }
    n.finish();
    return tc;
  }

  void parse_power(Node& root) {
    Node n = root.child_or_empty("power");
    PowerConfig pc;
    Node e = n.child_or_empty("energy");
    EnergyParams p;
    p.adapter = e.get<double>("adapter", p.adapter);
    p.switch_ = e.get<double>("switch", p.switch_);
    p.nvlink_intra_tray = e.get<double>("nvlink_intra_tray", p.nvlink_intra_tray);
    p.photonic_transceiver = e.get<double>("photonic_transceiver", p.photonic_transceiver);
    p.photonic_switch = e.get<double>("photonic_switch", p.photonic_switch);
    p.photonic_intra_tray = e.get<double>("photonic_intra_tray", p.photonic_intra_tray);
    e.finish();
    checked(e.path(), [&] { p.validate(); });
    pc.energy.baseline = p;
    pc.energy.photonic = p;

    Node sw = n.child_or_empty("switch_counts");
    for (Technology tech : {Technology::electronic, Technology::photonic}) {
      Node t = sw.child_or_empty(std::string(to_string(tech)));
      SwitchCounts& counts =
          tech == Technology::electronic ? pc.energy.baseline_switches : pc.energy.photonic_switches;
      for (Scenario sc : kScenarios) {
        const std::string key(to_string(sc));
        counts[sc] = t.get<std::int64_t>(key, default_switch_count(sc, tech));
        require(counts[sc] >= 0, t.at(key), "must be >= 0");
      }
      t.finish();
    }
    sw.finish();

    Node mix = n.child_or_empty("mix");
    const ScenarioMix defaults = ScenarioMix::defaults();
    pc.energy.mix.weights.clear();
    for (TrafficClass cls : kTrafficClasses) {
      const std::string key(to_string(cls));
      if (!mix.has(key)) {
        Json w = Json::object();
        for (const auto& [sc, weight] : defaults.weights.at(cls)) w[std::string(to_string(sc))] = weight;
        mix.json()[key] = w;
      }
      Node c = mix.child(key);
      for (auto it = c.json().begin(); it != c.json().end(); ++it) {
        Scenario sc{};
        checked(c.at(it.key()), [&] { sc = parse_scenario(it.key()); });
        pc.energy.mix.weights[cls][sc] = c.req<double>(it.key());
      }
      c.finish();
    }
    mix.finish();
    checked(mix.path(), [&] { pc.energy.mix.validate(); });

    if (!n.has("workloads")) n.json()["workloads"] = Json::array();
    Json& wl = n.raw("workloads");
    require(wl.is_array(), n.at("workloads"), "expected an array");
    for (std::size_t i = 0; i < wl.size(); ++i) {
      Node w(wl[i], n.at("workloads") + "[" + std::to_string(i) + "]");
      PowerWorkload pw;
      pw.id = w.get<std::string>("id", "workload" + std::to_string(i));
      pw.steps = w.get<double>("steps", 1.0);
      require(pw.steps >= 0, w.at("steps"), "must be >= 0");
      const bool has_ledger = w.has("ledger");
      const bool has_train = w.has("train");
      require(has_ledger != has_train, w.path(), "give exactly one of ledger or train");
      if (has_ledger) {
        Node l = w.child("ledger");
        TrafficLedger ledger;
        for (TrafficClass cls : kTrafficClasses) {
          const std::string key(to_string(cls));
          ledger[cls] = l.get<double>(key, 0.0);
          require(ledger[cls] >= 0, l.at(key), "must be >= 0");
        }
        l.finish();
        pw.ledger = ledger;
        w.json()["train"] = nullptr;
      } else {
        Node t = w.child("train");
        pw.train = parse_train_node(t);
        w.json()["ledger"] = nullptr;
      }
      w.finish();
      pc.workloads.push_back(pw);
    }
    n.finish();
    cfg.power = pc;
  }

  void parse_dlrm(Node& root) {
    Node n = root.child("dlrm");
    DlrmConfig dc;
    dc.reference_system = system_ref(n, "reference_system");
    dc.candidate_system = system_ref(n, "candidate_system");
    require(cfg.systems.at(dc.candidate_system).find_tier(MemoryRole::fabric_shared) != nullptr,
            n.at("candidate_system"), "needs a fabric-shared memory tier");
    dc.grid.tables = n.get<std::vector<std::int64_t>>("tables", dc.grid.tables);
    dc.grid.batches = n.get<std::vector<std::int64_t>>("batches", dc.grid.batches);
    dc.grid.pooling = n.get<std::vector<std::int64_t>>("pooling", dc.grid.pooling);
    for (const auto* v : {&dc.grid.tables, &dc.grid.batches, &dc.grid.pooling}) {
      require(!v->empty(), n.path(), "tables, batches and pooling must be non-empty");
      for (auto x : *v) require(x >= 1, n.path(), "grid entries must be >= 1");
    }
    dc.grid.embed_dim = n.get<std::int64_t>("embed_dim", 32);
    dc.grid.dtype_bytes = n.get<int>("dtype_bytes", 2);
    dc.grid.rows_per_table = n.get<std::int64_t>("rows_per_table", 1000000);
    require(dc.grid.embed_dim >= 1 && dc.grid.dtype_bytes >= 1 && dc.grid.rows_per_table >= 1,
            n.path(), "embed_dim, dtype_bytes and rows_per_table must be >= 1");
    dc.total_table_bytes = n.get<double>("total_table_bytes", 10e12);
    require(dc.total_table_bytes > 0, n.at("total_table_bytes"), "must be > 0");
    dc.per_device_capacity = n.get<double>(
        "per_device_capacity", cfg.systems.at(dc.reference_system).local_tier().capacity);
    require(dc.per_device_capacity > 0, n.at("per_device_capacity"), "must be > 0");
    dc.power_of_two_devices = n.get<bool>("power_of_two_devices", true);
    dc.coalescing = n.get<double>("coalescing", 1.0);
    require(dc.coalescing >= 1, n.at("coalescing"), "must be >= 1");
    if (!n.has("interconnects")) {
      Json list = Json::array();
      for (const Interconnect& ic : {Interconnect::nvlink(), Interconnect::pcie()}) {
        list.push_back({{"name", ic.name}, {"bandwidth", ic.bandwidth}, {"latency", ic.latency}});
      }
      n.json()["interconnects"] = list;
    }
    Json& ics = n.raw("interconnects");
    require(ics.is_array() && !ics.empty(), n.at("interconnects"), "expected a non-empty array");
    for (std::size_t i = 0; i < ics.size(); ++i) {
      Node ic(ics[i], n.at("interconnects") + "[" + std::to_string(i) + "]");
      Interconnect x;
      x.name = ic.req<std::string>("name");
      x.bandwidth = ic.req<double>("bandwidth");
      x.latency = ic.get<double>("latency", 0.0);
      require(x.bandwidth > 0, ic.at("bandwidth"), "must be > 0");
      require(x.latency >= 0, ic.at("latency"), "must be >= 0");
      ic.finish();
      dc.interconnects.push_back(x);
    }
    dc.device_counts = n.get<std::vector<std::int64_t>>("device_counts", {});
    for (auto x : dc.device_counts) require(x >= 1, n.at("device_counts"), "entries must be >= 1");
    n.finish();
    cfg.dlrm = dc;
  }

  void parse(Json doc) {
    Node root(doc, "");
    cfg.mode = parse_mode(root.req<std::string>("mode"));
    parse_options(root);
    parse_models(root);
    parse_systems(root);

    for (const char* section : {"infer", "sweep", "validate", "train", "power", "dlrm"}) {
      if (!root.has(section)) root.json()[section] = nullptr;
    }
    const Mode m = cfg.mode;
    auto need = [&](const char* section) {
      require(!root.json()[section].is_null(), section,
              "section is required for mode " + std::string(to_string(m)));
    };
    auto absent = [&](const char* section) { return root.json()[section].is_null(); };

    if (m == Mode::infer) need("infer");
    if (m == Mode::sweep || m == Mode::validate) need("sweep");
    if (m == Mode::validate) need("validate");
    if (m == Mode::train) need("train");
    if (m == Mode::dlrm) need("dlrm");
    if (m == Mode::power && absent("power")) root.json()["power"] = Json::object();

    if (!absent("infer")) parse_infer(root);
    if (!absent("sweep")) parse_sweep(root);
    if (!absent("validate")) {
      Node v = root.child("validate");
      std::filesystem::path p = v.req<std::string>("measurements");
      if (p.is_relative()) p = base_dir / p;
      require(std::filesystem::exists(p), v.at("measurements"), "file not found: " + p.string());
      cfg.measurements = p;
      v.finish();
    }
    if (!absent("train")) {
      Node t = root.child("train");
      cfg.train = parse_train_node(t);
    }
    if (!absent("power")) parse_power(root);
    if (!absent("dlrm")) parse_dlrm(root);

    Node out = root.child_or_empty("output");
    cfg.format = parse_format(out.get<std::string>("format", "json"));
    if (auto p = out.opt<std::string>("path")) cfg.output = *p;
    out.finish();
    root.finish();
    cfg.normalized = std::move(doc);
  }
};

}  // namespace

std::vector<SweepPoint> enumerate_sweep(const SweepConfig& sweep) {
  std::vector<SweepPoint> points;
  std::set<std::string> seen;
  for (const SweepCase& c : sweep.cases) {
    for (std::int64_t b : sweep.batches) {
      for (const LengthSweep& ls : sweep.length_sweeps) {
        for (std::int64_t in : ls.input_lens) {
          for (std::int64_t out : ls.output_lens) {
            std::string id = c.id + "_b" + std::to_string(b) + "_in" + std::to_string(in) +
                             "_out" + std::to_string(out);
            if (!seen.insert(id).second) continue;
            SweepPoint p;
            p.index = points.size();
            p.config_id = std::move(id);
            p.sweep_case = &c;
            p.shape = {b, in, out, 0};
            points.push_back(std::move(p));
          }
        }
      }
    }
  }
  return points;
}

RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  Parser p;
  p.base_dir = base_dir;
  p.parse(doc);
  return std::move(p.cfg);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                      std::optional<Mode> mode_override) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config file " + path.string() + ": expected an object");
  for (const std::string& o : overrides) apply_override(doc, o);
  if (mode_override) doc["mode"] = std::string(to_string(*mode_override));
  return parse_config(doc, path.parent_path());
}

}  // namespace pfsim
