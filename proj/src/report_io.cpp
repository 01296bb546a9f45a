#include "specuq/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "specuq/error.hpp"

namespace specuq {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError("not a number: \"" + std::string(text) + "\"");
  return value;
}

namespace {

std::size_t parse_index(std::string_view text) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError("not an index: \"" + std::string(text) + "\"");
  return value;
}

std::string optional_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void expect_header(const std::vector<std::vector<std::string>>& rows, const std::vector<std::string>& header) {
  if (rows.empty() || rows.front() != header) {
    std::string joined;
    for (const auto& h : header) joined += (joined.empty() ? "" : ",") + h;
    throw ValidationError("CSV header must be " + joined);
  }
}

void expect_width(const std::vector<std::string>& row, std::size_t width, std::size_t line) {
  if (row.size() != width) throw ParseError(line, "expected " + std::to_string(width) + " CSV fields");
}

template <class... Fields>
void write_row(std::ostream& out, const Fields&... fields) {
  bool first = true;
  ((out << (first ? "" : ",") << csv_escape(fields), first = false), ...);
  out << '\n';
}

}  // namespace

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_scores_csv(std::ostream& out, std::span<const QuestionScores> scores) {
  write_row(out, "question_id", "measure", "response_index", "u", "c", "semantic_set_id");
  for (const auto& q : scores) {
    for (const auto& s : q.scores) {
      write_row(out, q.question_id, s.measure, "", format_double(s.u), "", "");
      if (s.c) {
        for (std::size_t j = 0; j < s.c->size(); ++j) {
          write_row(out, q.question_id, s.measure, std::to_string(j), "", format_double((*s.c)[j]), "");
        }
      } else if (s.measure == "NumSet" && q.partition) {
        for (std::size_t j = 0; j < q.partition->assignment.size(); ++j) {
          write_row(out, q.question_id, s.measure, std::to_string(j), "", "",
                    std::to_string(q.partition->assignment[j]));
        }
      }
    }
  }
}

std::vector<QuestionScores> read_scores_csv(std::istream& in) {
  const auto rows = read_csv(in);
  expect_header(rows, {"question_id", "measure", "response_index", "u", "c", "semantic_set_id"});
  std::vector<QuestionScores> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    expect_width(row, 6, r + 1);
    auto [it, inserted] = index.emplace(row[0], out.size());
    if (inserted) {
      out.emplace_back();
      out.back().question_id = row[0];
    }
    QuestionScores& q = out[it->second];
    if (row[2].empty()) {
      if (q.find(row[1])) throw ParseError(r + 1, "duplicate U row for " + row[0] + " / " + row[1]);
      q.scores.push_back({row[1], parse_double(row[3]), std::nullopt});
      continue;
    }
    NamedScores* s = q.find(row[1]);
    if (s == nullptr) throw ParseError(r + 1, "response row before the U row of " + row[1]);
    const std::size_t j = parse_index(row[2]);
    if (!row[4].empty()) {
      if (!s->c) s->c.emplace();
      if (s->c->size() != j) throw ParseError(r + 1, "response rows out of order");
      s->c->push_back(parse_double(row[4]));
    }
    if (!row[5].empty()) {
      if (!q.partition) q.partition.emplace();
      if (q.partition->assignment.size() != j) throw ParseError(r + 1, "response rows out of order");
      const std::size_t id = parse_index(row[5]);
      q.partition->assignment.push_back(id);
      q.partition->num_sets = std::max(q.partition->num_sets, id + 1);
    }
  }
  return out;
}

std::vector<ReportRow> report_rows(const EvalReport& report) {
  const std::string setting = report.setting.label();
  const bool individual = report.setting.target() == Target::individual_accuracy;
  std::vector<ReportRow> rows;
  rows.push_back({"Random", setting, individual ? std::optional<double>(0.5) : std::nullopt,
                  report.base_accuracy, report.base_accuracy, 0.0});
  rows.push_back({"Oracle", setting, report.oracle_auroc, report.oracle_auarc, report.oracle_auarc, 0.0});
  for (const auto& m : report.measures) rows.push_back({m.measure, setting, m.auroc, m.auarc, m.auarc, 0.0});
  return rows;
}

std::vector<ReportRow> report_rows(const TrialSummary& summary) {
  std::vector<ReportRow> rows;
  for (const auto& m : summary.metrics) {
    rows.push_back({m.measure, m.setting, m.auroc_mean, m.auarc_mean, m.auarc_mean, m.auarc_std});
  }
  return rows;
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  write_row(out, "measure", "setting", "auroc", "auarc", "trial_mean", "trial_std");
  for (const auto& r : rows) {
    write_row(out, r.measure, r.setting, optional_double(r.auroc), format_double(r.auarc),
              format_double(r.trial_mean), format_double(r.trial_std));
  }
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  const auto rows = read_csv(in);
  expect_header(rows, {"measure", "setting", "auroc", "auarc", "trial_mean", "trial_std"});
  std::vector<ReportRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    expect_width(row, 6, r + 1);
    out.push_back({row[0], row[1], row[2].empty() ? std::nullopt : std::optional<double>(parse_double(row[2])),
                   parse_double(row[3]), parse_double(row[4]), parse_double(row[5])});
  }
  return out;
}

std::vector<ArcRow> arc_rows(const EvalReport& report) {
  std::vector<ArcRow> rows;
  for (const auto& p : report.oracle_arc) rows.push_back({"Random", p.keep_fraction, report.base_accuracy});
  for (const auto& p : report.oracle_arc) rows.push_back({"Oracle", p.keep_fraction, p.mean_target});
  for (const auto& m : report.measures) {
    for (const auto& p : m.arc) rows.push_back({m.measure, p.keep_fraction, p.mean_target});
  }
  return rows;
}

void write_arc_csv(std::ostream& out, std::span<const ArcRow> rows) {
  write_row(out, "measure", "keep_fraction", "mean_accuracy");
  for (const auto& r : rows) write_row(out, r.measure, format_double(r.keep_fraction), format_double(r.mean_accuracy));
}

std::vector<ArcRow> read_arc_csv(std::istream& in) {
  const auto rows = read_csv(in);
  expect_header(rows, {"measure", "keep_fraction", "mean_accuracy"});
  std::vector<ArcRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_width(rows[r], 3, r + 1);
    out.push_back({rows[r][0], parse_double(rows[r][1]), parse_double(rows[r][2])});
  }
  return out;
}

void write_embeddings_csv(std::ostream& out, std::span<const EmbeddingRow> rows) {
  write_row(out, "question_id", "response_index", "dim", "value");
  for (const auto& r : rows) {
    write_row(out, r.question_id, std::to_string(r.response_index), std::to_string(r.dim), format_double(r.value));
  }
}

std::vector<EmbeddingRow> read_embeddings_csv(std::istream& in) {
  const auto rows = read_csv(in);
  expect_header(rows, {"question_id", "response_index", "dim", "value"});
  std::vector<EmbeddingRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_width(rows[r], 4, r + 1);
    out.push_back({rows[r][0], parse_index(rows[r][1]), parse_index(rows[r][2]), parse_double(rows[r][3])});
  }
  return out;
}

void write_pick_best_csv(std::ostream& out, std::span<const PickBestRow> rows) {
  write_row(out, "measure", "mean_accuracy");
  for (const auto& r : rows) write_row(out, r.measure, format_double(r.mean_accuracy));
}

void write_trials_csv(std::ostream& out, const TrialSummary& summary, std::span<const std::string> measures) {
  write_row(out, "trial", "measure", "setting", "auroc", "auarc");
  for (const auto& trial : summary.trials) {
    for (const auto& report : trial.reports) {
      const std::string setting = report.setting.label();
      for (std::size_t k = 0; k < measures.size(); ++k) {
        const auto& m = report.measures[k];
        write_row(out, std::to_string(trial.trial), m.measure, setting, optional_double(m.auroc),
                  format_double(m.auarc));
      }
    }
  }
}

namespace {

json hyper_json(const Hyperparameters& h) { return {{"temperature", h.temperature}, {"ecc_threshold", h.ecc_threshold}}; }

Hyperparameters hyper_from(const json& j, const Hyperparameters& fallback) {
  Hyperparameters h = fallback;
  if (j.contains("temperature")) h.temperature = j.at("temperature").get<double>();
  if (j.contains("ecc_threshold")) h.ecc_threshold = j.at("ecc_threshold").get<double>();
  return h;
}

}  // namespace

std::string hyperparameters_json(const TrialSummary& summary, const Hyperparameters& defaults) {
  json doc;
  doc["defaults"] = hyper_json(defaults);
  json trials = json::array();
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<Hyperparameters, std::size_t>>> votes;
  for (const auto& trial : summary.trials) {
    json measures = json::object();
    for (const auto& c : trial.chosen) {
      json entry = hyper_json(c.hyper);
      entry["objective"] = c.objective;
      measures[c.measure] = entry;
      auto& v = votes[c.measure];
      if (v.empty()) order.push_back(c.measure);
      auto it = std::find_if(v.begin(), v.end(), [&](const auto& p) { return p.first == c.hyper; });
      if (it == v.end()) v.push_back({c.hyper, 1});
      else ++it->second;
    }
    trials.push_back({{"trial", trial.trial}, {"measures", measures}});
  }
  json selected = json::object();
  for (const auto& name : order) {
    const auto& v = votes[name];
    const auto best = std::max_element(v.begin(), v.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    selected[name] = hyper_json(best->first);
  }
  doc["selected"] = selected;
  doc["trials"] = trials;
  return doc.dump(2) + "\n";
}

HyperTable read_hyperparameters_json(std::istream& in) {
  HyperTable table;
  try {
    const json doc = json::parse(in);
    if (doc.contains("defaults")) table.defaults = hyper_from(doc.at("defaults"), table.defaults);
    if (doc.contains("selected")) {
      for (const auto& [name, value] : doc.at("selected").items()) {
        MeasureSpec::parse(name);
        table.per_measure[name] = hyper_from(value, table.defaults);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed hyper-parameter file: ") + e.what());
  }
  return table;
}

}  // namespace specuq
