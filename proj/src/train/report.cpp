/*
 * Copyright 2026 The mieeg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mieeg/train/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "mieeg/error.hpp"

namespace mieeg::train {

using nlohmann::ordered_json;

void mean_std(const std::vector<double>& values, double& mean, double& std) {
  mean = 0.0;
  std = 0.0;
  if (values.empty()) return;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  std = std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, double>;
  std::vector<Key> order;
  std::map<Key, std::map<std::uint64_t, std::vector<double>>> groups;
  for (const auto& r : rows) {
    if (r.split != "test") continue;
    const Key k{r.dataset, r.variant, r.alpha};
    if (!groups.count(k)) order.push_back(k);
    groups[k][r.seed].push_back(r.accuracy);
  }
  std::vector<SummaryRow> out;
  for (const auto& k : order) {
    SummaryRow s;
    std::tie(s.dataset, s.variant, s.alpha) = k;
    s.label = variant_label(parse_variant(s.variant));
    for (const auto& [seed, accs] : groups[k]) {
      double m = 0.0, sd = 0.0;
      mean_std(accs, m, sd);
      s.seeds.push_back(seed);
      s.per_seed.push_back(m);
    }
    mean_std(s.per_seed, s.mean, s.std);
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_accuracy(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

namespace {

std::string format_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", a);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string RunReport::to_json() const {
  ordered_json j;
  j["command"] = command;
  j["config"] = ordered_json::parse(config_json);
  j["retained_subjects"] = retained_subjects;
  ordered_json hashes = ordered_json::object();
  for (const auto& [subject, h] : split_hashes) hashes[subject] = h;
  j["split_hashes"] = hashes;
  ordered_json curves = ordered_json::array();
  for (const auto& c : loss_curves) {
    ordered_json e = ordered_json::array();
    for (const auto& l : c.epochs) e.push_back({{"rec", l.rec}, {"cls", l.cls}, {"total", l.total}});
    curves.push_back({{"variant", c.variant}, {"alpha", c.alpha}, {"seed", c.seed}, {"epochs", e}});
  }
  j["loss_curves"] = curves;
  ordered_json results = ordered_json::array();
  for (const auto& r : rows)
    results.push_back({{"dataset", r.dataset}, {"subject", r.subject}, {"seed", r.seed}, {"variant", r.variant},
                       {"alpha", r.alpha}, {"split", r.split}, {"accuracy", r.accuracy}});
  j["results"] = results;
  ordered_json summ = ordered_json::array();
  for (const auto& s : summary)
    summ.push_back({{"dataset", s.dataset}, {"variant", s.variant}, {"label", s.label}, {"alpha", s.alpha},
                    {"seeds", s.seeds}, {"per_seed", s.per_seed}, {"mean", s.mean}, {"std", s.std}});
  j["summary"] = summ;
  return j.dump(2) + "\n";
}

std::string RunReport::to_csv() const {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const auto& r : rows)
    os << csv_field(r.dataset) << ',' << csv_field(r.subject) << ',' << r.seed << ',' << r.variant << ','
       << format_alpha(r.alpha) << ',' << r.split << ',' << format_accuracy(r.accuracy) << "\n";
  return os.str();
}

std::string RunReport::summary_csv() const {
  std::ostringstream os;
  os << "dataset,variant,label,alpha,seeds,mean,std\n";
  for (const auto& s : summary)
    os << csv_field(s.dataset) << ',' << s.variant << ',' << csv_field(s.label) << ',' << format_alpha(s.alpha) << ','
       << s.seeds.size() << ',' << format_accuracy(s.mean) << ',' << format_accuracy(s.std) << "\n";
  return os.str();
}

void RunReport::write(const std::filesystem::path& stem) const {
  const auto base = stem.string();
  write_text(base + ".json", to_json());
  write_text(base + ".csv", to_csv());
  write_text(base + ".summary.csv", summary_csv());
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  ordered_json t{{"wall_seconds", wall_seconds},
                 {"finished_unix", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  write_text(base + ".timing.json", t.dump(2) + "\n");
}

}  // namespace mieeg::train
