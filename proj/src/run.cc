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

#include <algorithm>
#include <cmath>
#include <optional>

#include "parallel_map.h"
#include "pfsim/config.h"
#include "pfsim/errors.h"

namespace pfsim {
namespace {

// Re-throws with `context` prepended, keeping the error category.
template <class F>
auto with_context(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const SimulationError& e) {
    throw SimulationError(context + ": " + e.what());
  }
}

std::string str(std::string_view s) { return std::string(s); }

void add_breakdown_row(Table& t, const std::string& id, const std::string& phase,
                       const TimingBreakdown& b) {
  t.add_row({id, phase, b.gemm, b.attention, b.norm_residual_other, b.tp_comm, b.pp_comm,
             b.memory_offload, b.total()});
}

const std::vector<std::string> kBreakdownColumns = {
    "id",      "phase",   "gemm_s",           "attention_s", "norm_residual_other_s",
    "tp_comm_s", "pp_comm_s", "memory_offload_s", "total_s"};

void run_infer(const RunConfig& cfg, int jobs, RunReport& report) {
  const auto& runs = cfg.infer_runs;
  if (!runs.empty()) {
    std::vector<InferenceResult> results(runs.size());
    detail::parallel_for(runs.size(), jobs, [&](std::size_t i) {
      const InferRun& r = runs[i];
      results[i] = with_context("infer run '" + r.id + "'", [&] {
        return run_inference(cfg.model(r.model), cfg.system(r.system), r.plan, r.shape,
                             cfg.infer_options);
      });
    });
    Table t{"inference",
            {"id", "model", "system", "tp", "pp", "dp", "batch", "input_len", "output_len",
             "max_batch", "prefill_s", "decode_s", "e2e_latency_s", "throughput_tok_s", "mfu",
             "model_flops"},
            {}};
    Table b{"breakdown", kBreakdownColumns, {}};
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const InferRun& r = runs[i];
      const InferenceResult& x = results[i];
      t.add_row({r.id, r.model, r.system, r.plan.tp, r.plan.pp, r.plan.dp, r.shape.batch,
                 r.shape.input_len, r.shape.output_len, x.max_batch, x.prefill_time,
                 x.decode_time, x.e2e_latency, x.throughput, x.mfu, x.model_flops});
      add_breakdown_row(b, r.id, "prefill", x.prefill);
      add_breakdown_row(b, r.id, "decode", x.decode);
      add_breakdown_row(b, r.id, "total", x.breakdown);
    }
    report.tables.push_back(std::move(t));
    report.tables.push_back(std::move(b));
  }

  if (cfg.speedup) {
    const SpeedupConfig& s = *cfg.speedup;
    std::vector<ModelSpec> models;
    for (const auto& id : s.models) models.push_back(cfg.model(id));
    const SystemUnderTest base{s.baseline_system, cfg.system(s.baseline_system), s.baseline_plan};
    const SystemUnderTest cand{s.candidate_system, cfg.system(s.candidate_system),
                               s.candidate_plan};
    const auto rows = with_context("infer.speedup", [&] {
      return speedup_matrix(models, base, cand, s.lengths, s.compute_scales, cfg.infer_options,
                            s.batch_cap);
    });
    Table t{"speedup",
            {"model", "input_len", "output_len", "compute_scale", "baseline_batch",
             "candidate_batch", "baseline_throughput_tok_s", "candidate_throughput_tok_s",
             "throughput_speedup", "baseline_latency_s", "candidate_latency_s",
             "latency_speedup", "baseline_mfu", "candidate_mfu"},
            {}};
    double best_tp = 0, best_lat = 0;
    for (const SpeedupRow& r : rows) {
      t.add_row({r.model, r.input_len, r.output_len, r.compute_scale, r.baseline_batch,
                 r.candidate_batch, r.baseline_throughput, r.candidate_throughput,
                 r.throughput_speedup, r.baseline_latency, r.candidate_latency, r.latency_speedup,
                 r.baseline_mfu, r.candidate_mfu});
      best_tp = std::max(best_tp, r.throughput_speedup);
      best_lat = std::max(best_lat, r.latency_speedup);
    }
    report.tables.push_back(std::move(t));
    report.metrics["max_throughput_speedup"] = best_tp;
    report.metrics["max_latency_speedup"] = best_lat;
  }

  if (cfg.tp_overhead) {
    const TpOverheadConfig& o = *cfg.tp_overhead;
    const auto rows = with_context("infer.tp_overhead", [&] {
      return tp_overhead_curve(cfg.model(o.model), cfg.system(o.system), o.shape, o.tp,
                               cfg.infer_options);
    });
    Table t{"tp_overhead",
            {"tp", "decode_s", "ideal_s", "overhead", "allreduce_s", "allreduce_share"},
            {}};
    for (const TpOverheadRow& r : rows) {
      t.add_row({r.tp, r.time, r.ideal_time, r.overhead, r.allreduce_time, r.allreduce_share});
    }
    report.tables.push_back(std::move(t));
  }

  if (cfg.intensity) {
    const IntensityConfig& a = *cfg.intensity;
    const ModelSpec& model = cfg.model(a.model);
    const auto points = with_context("infer.intensity", [&] {
      return arithmetic_intensity_curve(model, a.phase, a.batches, a.lengths,
                                        cfg.infer_options.cost);
    });
    Table t{"intensity", {"phase", "batch", "length", "flops", "bytes", "intensity"}, {}};
    for (const IntensityPoint& p : points) {
      t.add_row({str(to_string(a.phase)), p.batch, p.length, p.flops, p.bytes, p.intensity});
    }
    report.tables.push_back(std::move(t));
    for (const auto& [id, system] : cfg.systems) {
      const Dtype dtype = compute_dtype(model, system.processor);
      if (system.processor.peak_matrix_flops.count(dtype)) {
        report.metrics["ridge_intensity." + id] = ridge_intensity(system, dtype);
      }
    }
  }
}

std::vector<InferenceResult> simulate_sweep(const RunConfig& cfg, const std::vector<SweepPoint>& points,
                                            int jobs) {
  std::vector<InferenceResult> results(points.size());
  detail::parallel_for(points.size(), jobs, [&](std::size_t i) {
    const SweepPoint& p = points[i];
    const SweepCase& c = *p.sweep_case;
    results[i] = with_context("sweep point '" + p.config_id + "'", [&] {
      return run_inference(cfg.model(c.model), cfg.system(c.system), c.plan, p.shape,
                           cfg.infer_options);
    });
  });
  return results;
}

Table sweep_table(const std::vector<SweepPoint>& points,
                  const std::vector<InferenceResult>& results) {
  Table t{"sweep",
          {"config_id", "case", "model", "system", "tp", "pp", "dp", "batch", "input_len",
           "output_len", "max_batch", "prefill_s", "decode_s", "e2e_latency_s",
           "throughput_tok_s", "mfu"},
          {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    const SweepCase& c = *p.sweep_case;
    const InferenceResult& x = results[i];
    t.add_row({p.config_id, c.id, c.model, c.system, c.plan.tp, c.plan.pp, c.plan.dp,
               p.shape.batch, p.shape.input_len, p.shape.output_len, x.max_batch,
               x.prefill_time, x.decode_time, x.e2e_latency, x.throughput, x.mfu});
  }
  return t;
}

void run_sweep(const RunConfig& cfg, int jobs, RunReport& report) {
  const auto points = enumerate_sweep(*cfg.sweep);
  const auto results = simulate_sweep(cfg, points, jobs);
  report.tables.push_back(sweep_table(points, results));
  report.metrics["points"] = static_cast<double>(points.size());
}

void run_validate(const RunConfig& cfg, int jobs, RunReport& report) {
  MeasurementSet set = read_measurements_file(*cfg.measurements);
  const auto points = enumerate_sweep(*cfg.sweep);
  std::map<std::string, std::size_t> index;
  for (const SweepPoint& p : points) index[p.config_id] = p.index;
  std::vector<SweepPoint> wanted;
  for (const Measurement& m : set) {
    auto it = index.find(m.config_id);
    if (it == index.end()) {
      throw ValidationError("measurement '" + m.config_id + "' does not match any sweep point");
    }
    wanted.push_back(points[it->second]);
  }
  const auto results = simulate_sweep(cfg, wanted, jobs);
  Table t{"validation", {"config_id", "predicted_s", "measured_s", "abs_pct_error"}, {}};
  for (std::size_t i = 0; i < set.size(); ++i) {
    set[i].predicted = results[i].e2e_latency;
    t.add_row({set[i].config_id, set[i].predicted, set[i].measured,
               100.0 * std::abs(set[i].predicted - set[i].measured) / set[i].measured});
  }
  report.tables.push_back(std::move(t));
  report.metrics["mape"] = mape(set);
  report.metrics["r2"] = r_squared(set);
  report.metrics["points"] = static_cast<double>(set.size());
}

TrainStepResult simulate_train(const RunConfig& cfg, const TrainConfig& tc) {
  const ModelSpec& model = cfg.model(tc.model);
  const SystemSpec& system = cfg.system(tc.system);
  if (tc.plan) return train_step_time(model, system, *tc.plan, tc.options);
  return search_plan(model, system, *tc.device_budget, tc.search);
}

void run_train(const RunConfig& cfg, RunReport& report) {
  const TrainConfig& tc = *cfg.train;
  const TrainStepResult r = with_context("train", [&] { return simulate_train(cfg, tc); });
  const ParallelismPlan& p = r.plan;
  Table t{"train",
          {"model", "system", "tp", "pp", "dp", "microbatch", "num_microbatches", "global_batch",
           "seq_len", "step_time_s", "stage_time_s", "pipeline_time_s", "dp_comm_time_s",
           "offload_time_s", "bubble_fraction", "mfu", "model_flops"},
          {}};
  t.add_row({tc.model, tc.system, p.tp, p.pp, p.dp, p.microbatch, p.num_microbatches,
             p.global_batch(), tc.options.seq_len, r.step_time, r.stage_time, r.pipeline_time,
             r.dp_comm_time, r.offload_time, r.bubble_fraction, r.mfu, r.model_flops});
  report.tables.push_back(std::move(t));

  Table mem{"train_memory", {"component", "bytes_per_device"}, {}};
  mem.add_row({"params", r.memory.params});
  mem.add_row({"gradients", r.memory.gradients});
  mem.add_row({"optimizer_states", r.memory.optimizer_states});
  mem.add_row({"activations", r.memory.activations});
  mem.add_row({"total", r.memory.total()});
  mem.add_row({"local_capacity", cfg.system(tc.system).local_tier().capacity});
  mem.add_row({"offload_excess", r.offload.excess_bytes});
  mem.add_row({"offload_bytes_per_step", r.offload.bytes_per_step});
  report.tables.push_back(std::move(mem));

  Table traffic{"traffic", {"class", "bits"}, {}};
  for (TrafficClass cls : kTrafficClasses) traffic.add_row({str(to_string(cls)), r.ledger[cls]});
  traffic.add_row({"total", r.ledger.total()});
  report.tables.push_back(std::move(traffic));

  Table b{"breakdown", kBreakdownColumns, {}};
  add_breakdown_row(b, "step", "train", r.breakdown);
  report.tables.push_back(std::move(b));

  report.metrics["step_time_s"] = r.step_time;
  report.metrics["mfu"] = r.mfu;
  if (r.offload.destination) {
    report.warnings.push_back("train: " + format_number(r.offload.excess_bytes) +
                              " bytes per device exceed local memory and are offloaded to " +
                              str(to_string(*r.offload.destination)));
  }
}

void run_power(const RunConfig& cfg, RunReport& report) {
  const PowerConfig& pc = *cfg.power;
  const EnergyModel& em = pc.energy;
  std::vector<std::string> warnings;

  Table paths{"path_energy", {"scenario", "technology", "switch_count", "pj_per_bit"}, {}};
  for (Scenario sc : kScenarios) {
    for (Technology tech : {Technology::electronic, Technology::photonic}) {
      const bool electronic = tech == Technology::electronic;
      const PathProfile prof = scenario_profile(
          sc, tech, electronic ? em.baseline_switches : em.photonic_switches, &warnings);
      paths.add_row({str(to_string(sc)), str(to_string(tech)), prof.switch_count,
                     path_energy(prof, electronic ? em.baseline : em.photonic)});
    }
  }
  report.tables.push_back(std::move(paths));

  Table per_class{"class_energy", {"class", "baseline_pj_per_bit", "photonic_pj_per_bit"}, {}};
  for (TrafficClass cls : kTrafficClasses) {
    per_class.add_row({str(to_string(cls)),
                       expected_per_bit(em.mix, cls, Technology::electronic, em.baseline,
                                        em.baseline_switches),
                       expected_per_bit(em.mix, cls, Technology::photonic, em.photonic,
                                        em.photonic_switches)});
  }
  report.tables.push_back(std::move(per_class));

  Table energy{"energy",
               {"workload", "class", "bits", "baseline_pj_per_bit", "photonic_pj_per_bit",
                "baseline_j", "photonic_j", "percent_of_baseline", "savings"},
               {}};
  for (const PowerWorkload& w : pc.workloads) {
    TrafficLedger ledger;
    if (w.ledger) {
      ledger = *w.ledger;
    } else {
      const TrainStepResult r =
          with_context("power workload '" + w.id + "'", [&] { return simulate_train(cfg, *w.train); });
      ledger = r.ledger;
    }
    ledger = ledger.scaled(w.steps);
    const EnergyReport e = workload_energy(ledger, em);
    for (const EnergyRow& row : e.rows) {
      energy.add_row({w.id, str(to_string(row.cls)), row.bits, row.baseline_pj_per_bit,
                      row.photonic_pj_per_bit, row.baseline_joules, row.photonic_joules,
                      100.0 * row.remaining, row.savings});
    }
    const double remaining = e.baseline_joules > 0 ? e.photonic_joules / e.baseline_joules : 1.0;
    energy.add_row({w.id, "total", ledger.total(), std::nan(""), std::nan(""), e.baseline_joules,
                    e.photonic_joules, 100.0 * remaining, e.savings});
    report.metrics["savings." + w.id] = e.savings;
  }
  report.tables.push_back(std::move(energy));

  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  for (auto& w : warnings) report.warnings.push_back("power: " + w);
}

void run_dlrm(const RunConfig& cfg, RunReport& report) {
  const DlrmConfig& d = *cfg.dlrm;
  const SystemSpec& ref_sys = cfg.system(d.reference_system);
  const SystemSpec& cand_sys = cfg.system(d.candidate_system);
  const std::int64_t devices =
      required_devices(d.total_table_bytes, d.per_device_capacity, d.power_of_two_devices);

  Table dev{"dlrm_devices",
            {"total_table_bytes", "per_device_capacity", "power_of_two", "devices"},
            {}};
  dev.add_row({d.total_table_bytes, d.per_device_capacity, d.power_of_two_devices, devices});
  report.tables.push_back(std::move(dev));
  report.metrics["devices"] = static_cast<double>(devices);

  DlrmPlacement cand;
  cand.mode = PlacementMode::shared_fabric;

  Table t{"dlrm",
          {"interconnect", "devices", "tables", "batch", "pooling", "lookup_bytes",
           "reference_s", "candidate_s", "speedup"},
          {}};
  for (const Interconnect& ic : d.interconnects) {
    DlrmPlacement ref{PlacementMode::distributed_rowwise, devices, ic, d.coalescing};
    const auto rows = with_context("dlrm", [&] {
      return dlrm_sweep(d.grid, ref, ref_sys, cand, cand_sys);
    });
    double lo = INFINITY, hi = 0, sum = 0;
    for (const DlrmRow& r : rows) {
      sum += r.speedup;
      t.add_row({ic.name, devices, r.tables, r.batch, r.pooling, r.lookup_bytes, r.reference_time,
                 r.candidate_time, r.speedup});
      lo = std::min(lo, r.speedup);
      hi = std::max(hi, r.speedup);
    }
    report.metrics["min_speedup." + ic.name] = lo;
    report.metrics["max_speedup." + ic.name] = hi;
    report.metrics["mean_speedup." + ic.name] = sum / static_cast<double>(rows.size());
  }
  report.tables.push_back(std::move(t));

  if (!d.device_counts.empty()) {
    Table s{"dlrm_scaling",
            {"interconnect", "devices", "tables", "batch", "pooling", "reference_s",
             "candidate_s", "speedup"},
            {}};
    const std::int64_t tables = d.grid.tables.back();
    const std::int64_t batch = d.grid.batches.back();
    for (const Interconnect& ic : d.interconnects) {
      for (std::int64_t n : d.device_counts) {
        for (std::int64_t pooling : d.grid.pooling) {
          const DlrmSpec spec{tables, d.grid.rows_per_table, d.grid.embed_dim, pooling,
                              d.grid.dtype_bytes, batch};
          const DlrmPlacement ref{PlacementMode::distributed_rowwise, n, ic, d.coalescing};
          const double tr = pooling_time(spec, ref, ref_sys).total;
          const double tc = pooling_time(spec, cand, cand_sys).total;
          s.add_row({ic.name, n, tables, batch, pooling, tr, tc, tr / tc});
        }
      }
    }
    report.tables.push_back(std::move(s));
  }
}

}  // namespace

RunReport run(const RunConfig& config, int jobs) {
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  RunReport report;
  report.mode = std::string(to_string(config.mode));
  report.config = config.normalized;
  switch (config.mode) {
    case Mode::infer: run_infer(config, jobs, report); break;
    case Mode::sweep: run_sweep(config, jobs, report); break;
    case Mode::validate: run_validate(config, jobs, report); break;
    case Mode::train: run_train(config, report); break;
    case Mode::power: run_power(config, report); break;
    case Mode::dlrm: run_dlrm(config, report); break;
  }
  return report;
}

}  // namespace pfsim
