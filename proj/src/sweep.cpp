// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "tara/error.hpp"
#include "tara/evaluator.hpp"

namespace tara {

SweepTable ablation_sweep(const SweepGrid& grid, const SweepPipeline& pipeline) {
  if (grid.n.empty() || grid.alpha.empty() || grid.seeds.empty()) throw Error("sweep grid has an empty axis");
  SweepTable table;
  for (auto n : grid.n) {
    for (auto alpha : grid.alpha) {
      std::vector<const SweepRow*> cell;
      for (auto seed : grid.seeds) {
        SweepRow row{n, alpha, seed, {}, {}};
        try {
          row.values = pipeline(n, alpha, seed);
        } catch (const std::exception& e) {
          throw Error(fmt::format("sweep cell n={} alpha={} seed={}: {}", n, alpha, seed, e.what()));
        }
        table.runs.push_back(std::move(row));
      }
      SweepRow agg{n, alpha, std::nullopt, {}, {}};
      const std::size_t first = table.runs.size() - grid.seeds.size();
      for (const auto& [metric, unused] : table.runs[first].values) {
        std::vector<double> xs;
        for (std::size_t i = first; i < table.runs.size(); ++i) {
          auto it = table.runs[i].values.find(metric);
          if (it != table.runs[i].values.end()) xs.push_back(it->second);
        }
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - m) * (x - m);
        agg.values[metric] = m;
        agg.stddev[metric] = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
      }
      table.aggregates.push_back(std::move(agg));
    }
  }
  return table;
}

std::string format_mean_std(double mean, double stddev, int precision) {
  return fmt::format("{:.{}f} ±{:.{}f}", mean, precision, stddev, precision);
}

namespace {

std::vector<std::string> metric_names(const SweepTable& table) {
  std::set<std::string> names;
  for (const auto& r : table.runs) {
    for (const auto& [k, v] : r.values) names.insert(k);
  }
  return {names.begin(), names.end()};
}

}  // namespace

std::string sweep_csv(const SweepTable& table) {
  const auto names = metric_names(table);
  std::string out = "n,alpha,seed,row";
  for (const auto& m : names) out += "," + m;
  out += '\n';
  for (const auto& r : table.runs) {
    out += fmt::format("{},{},{},run", r.n, r.alpha, *r.seed);
    for (const auto& m : names) {
      auto it = r.values.find(m);
      out += it == r.values.end() ? std::string(",") : fmt::format(",{:.6f}", it->second);
    }
    out += '\n';
  }
  for (const auto& r : table.aggregates) {
    out += fmt::format("{},{},,mean_std", r.n, r.alpha);
    for (const auto& m : names) {
      auto it = r.values.find(m);
      out += it == r.values.end() ? std::string(",") : "," + format_mean_std(it->second, r.stddev.at(m), 4);
    }
    out += '\n';
  }
  return out;
}

std::string sweep_plot_csv(const SweepTable& table) {
  std::string out = "n,alpha,metric,mean,std\n";
  for (const auto& r : table.aggregates) {
    for (const auto& [m, v] : r.values) {
      out += fmt::format("{},{},{},{:.6f},{:.6f}\n", r.n, r.alpha, m, v, r.stddev.at(m));
    }
  }
  return out;
}

std::string sweep_chart_spec(const std::string& plot_csv_name, const std::string& metric) {
  io::json j;
  j["$schema"] = "https://vega.github.io/schema/vega-lite/v5.json";
  j["data"] = {{"url", plot_csv_name}, {"format", {{"type", "csv"}}}};
  j["transform"] = io::json::array({{{"filter", fmt::format("datum.metric == '{}'", metric)}}});
  j["mark"] = {{"type", "line"}, {"point", true}};
  j["encoding"] = {
      {"x", {{"field", "alpha"}, {"type", "quantitative"}, {"title", "temporal fraction"}}},
      {"y", {{"field", "mean"}, {"type", "quantitative"}, {"title", metric}}},
      {"color", {{"field", "n"}, {"type", "nominal"}}},
  };
  return j.dump(2) + '\n';
}

}  // namespace tara
