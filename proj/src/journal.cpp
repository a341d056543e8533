#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "soctuner/csv.hpp"
#include "soctuner/tuner.hpp"

namespace soctuner {

using nlohmann::ordered_json;

std::string journal_line(const JournalRecord& r, const DesignSpace& space,
                         std::span<const std::string> metric_names, bool wall_time) {
  ordered_json j;
  j["type"] = "evaluation";
  j["evaluation"] = r.evaluation;
  j["iteration"] = r.iteration;
  j["phase"] = r.phase;
  j["point"] = space.labels_of(r.point);
  ordered_json metrics = ordered_json::object();
  for (std::size_t k = 0; k < r.metrics.size(); ++k)
    metrics[k < metric_names.size() ? metric_names[k] : fmt::format("m{}", k)] = r.metrics[k];
  j["metrics"] = metrics;
  j["archive_size"] = r.archive_size;
  if (r.adrs) j["adrs"] = *r.adrs;
  if (r.archive_adrs) j["archive_adrs"] = *r.archive_adrs;
  if (r.acquisition) j["acquisition"] = *r.acquisition;
  if (!r.hyperparameters.empty()) {
    ordered_json hp = ordered_json::array();
    for (const auto& p : r.hyperparameters)
      hp.push_back({{"signal_variance", p.signal_variance},
                    {"length_scales", p.length_scales},
                    {"noise_variance", p.noise_variance}});
    j["hyperparameters"] = hp;
  }
  if (wall_time) j["wall_ms"] = r.wall_ms;
  return j.dump();
}

std::string journal_note_line(const std::string& note) {
  ordered_json j;
  j["type"] = "note";
  j["note"] = note;
  return j.dump();
}

void RunJournal::write_jsonl(std::ostream& out, const DesignSpace& space,
                             std::span<const std::string> metric_names, bool wall_time) const {
  for (const auto& r : records) out << journal_line(r, space, metric_names, wall_time) << '\n';
  for (const auto& n : notes) out << journal_note_line(n) << '\n';
}

RunJournal RunJournal::read_jsonl(std::istream& in, const DesignSpace& space) {
  RunJournal journal;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw std::runtime_error(fmt::format("journal line {}: {}", line_no, e.what()));
    }
    const auto type = j.value("type", std::string{});
    if (type == "note") {
      journal.notes.push_back(j.at("note").get<std::string>());
      continue;
    }
    if (type != "evaluation")
      throw std::runtime_error(fmt::format("journal line {}: unknown record type '{}'", line_no, type));
    JournalRecord r;
    r.evaluation = j.at("evaluation").get<std::size_t>();
    r.iteration = j.at("iteration").get<std::size_t>();
    r.phase = j.at("phase").get<std::string>();
    const auto labels = j.at("point").get<std::vector<std::string>>();
    if (labels.size() != space.dimension())
      throw std::runtime_error(fmt::format("journal line {}: point has {} entries", line_no, labels.size()));
    r.point.assignment.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::size_t idx = space.parameter(i).find_label(labels[i]);
      if (idx == space.parameter(i).size())
        throw std::runtime_error(fmt::format("journal line {}: unknown candidate '{}'", line_no, labels[i]));
      r.point.assignment[i] = idx;
    }
    for (const auto& [name, value] : j.at("metrics").items()) r.metrics.push_back(value.get<double>());
    r.archive_size = j.at("archive_size").get<std::size_t>();
    if (j.contains("adrs")) r.adrs = j["adrs"].get<double>();
    if (j.contains("archive_adrs")) r.archive_adrs = j["archive_adrs"].get<double>();
    if (j.contains("acquisition")) r.acquisition = j["acquisition"].get<double>();
    if (j.contains("hyperparameters")) {
      for (const auto& hp : j["hyperparameters"]) {
        KernelParams p;
        p.signal_variance = hp.at("signal_variance").get<double>();
        p.length_scales = hp.at("length_scales").get<std::vector<double>>();
        p.noise_variance = hp.at("noise_variance").get<double>();
        r.hyperparameters.push_back(std::move(p));
      }
    }
    r.wall_ms = j.value("wall_ms", 0.0);
    journal.records.push_back(std::move(r));
  }
  return journal;
}

std::vector<std::pair<std::size_t, double>> RunJournal::adrs_by_iteration() const {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& r : records) {
    if (!r.adrs) continue;
    if (!out.empty() && out.back().first == r.iteration)
      out.back().second = *r.adrs;
    else
      out.emplace_back(r.iteration, *r.adrs);
  }
  return out;
}

void write_adrs_csv(std::ostream& out, const RunJournal& journal) {
  out << "iteration,adrs\n";
  for (const auto& [it, value] : journal.adrs_by_iteration())
    out << it << ',' << csv::format_number(value) << '\n';
}

std::vector<std::pair<std::size_t, double>> read_adrs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{"iteration", "adrs"})
    throw std::runtime_error("adrs csv: expected header 'iteration,adrs'");
  std::vector<std::pair<std::size_t, double>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    double it = 0.0, value = 0.0;
    if (f.size() != 2 || !csv::parse_number(f[0], it) || !csv::parse_number(f[1], value) || it < 0)
      throw std::runtime_error(fmt::format("adrs csv: bad row '{}'", line));
    out.emplace_back(static_cast<std::size_t>(it), value);
  }
  return out;
}

}  // namespace soctuner
