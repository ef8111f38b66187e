#include "creepdb/screening/metrics.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "creepdb/error.hpp"

namespace creepdb::screening {

ScreeningDecision::ScreeningDecision(std::string bundle_id, bool has_data, bool has_equation,
                                     std::string rationale)
    : bundle_id_(std::move(bundle_id)),
      has_data_(has_data),
      has_equation_(has_equation),
      rationale_(std::move(rationale)) {
  if (!pass() && rationale_.empty()) {
    if (!has_data_ && !has_equation_)
      rationale_ = "no experimental creep data and no constitutive equation";
    else if (!has_data_)
      rationale_ = "no experimental creep data";
    else
      rationale_ = "no constitutive equation";
  }
}

nlohmann::json ScreeningDecision::to_json() const {
  return {{"bundle_id", bundle_id_}, {"has_data", has_data_}, {"has_equation", has_equation_},
          {"pass", pass()}, {"rationale", rationale_}};
}

nlohmann::json ConfusionCounts::to_json() const {
  return {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}};
}

ConfusionCounts confusion(const std::vector<ScreeningDecision>& decisions,
                          const std::map<std::string, bool>& truth) {
  ConfusionCounts c;
  for (const auto& d : decisions) {
    auto it = truth.find(d.bundle_id());
    if (it == truth.end()) fail(ErrorCode::MissingTruth, "no ground truth for " + d.bundle_id());
    if (d.pass()) {
      (it->second ? c.tp : c.fp)++;
    } else {
      (it->second ? c.fn : c.tn)++;
    }
  }
  return c;
}

namespace {
double ratio(std::uint64_t num, std::uint64_t den, const char* what) {
  if (den == 0) fail(ErrorCode::UndefinedMetric, std::string(what) + " has a zero denominator");
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

double precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp, "precision"); }
double recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn, "recall"); }

double f1(double p, double r) {
  require(p >= 0.0 && p <= 1.0 && r >= 0.0 && r <= 1.0, "precision and recall must lie in [0, 1]");
  if (p + r == 0.0) fail(ErrorCode::UndefinedMetric, "f1 with precision = recall = 0");
  return 2.0 * p * r / (p + r);
}

double f1(const ConfusionCounts& c) { return f1(precision(c), recall(c)); }

double accuracy(const ConfusionCounts& c) { return ratio(c.tp + c.tn, c.total(), "accuracy"); }

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

bool parse_flag(const std::string& cell, const std::string& where) {
  std::string v = trim(cell);
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  fail(ErrorCode::MalformedManifest, where + ": expected 0 or 1, got '" + v + "'");
}

void for_each_row(const std::string& path, const std::function<void(const std::vector<std::string>&,
                                                                    const std::string&)>& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingAsset, "cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split_csv_line(t);
    bool header = first && trim(cells[0]) == "bundle_id";
    first = false;
    if (header) continue;
    fn(cells, path + ":" + std::to_string(lineno));
  }
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::map<std::string, bool> load_truth_csv(const std::string& path) {
  std::map<std::string, bool> truth;
  for_each_row(path, [&](const std::vector<std::string>& cells, const std::string& where) {
    if (cells.size() != 2) fail(ErrorCode::MalformedManifest, where + ": expected bundle_id,relevant");
    truth[trim(cells[0])] = parse_flag(cells[1], where);
  });
  return truth;
}

std::vector<ScreeningDecision> load_decisions_csv(const std::string& path) {
  std::vector<ScreeningDecision> out;
  for_each_row(path, [&](const std::vector<std::string>& cells, const std::string& where) {
    if (cells.size() < 3)
      fail(ErrorCode::MalformedManifest, where + ": expected bundle_id,has_data,has_equation");
    out.emplace_back(trim(cells[0]), parse_flag(cells[1], where), parse_flag(cells[2], where),
                     cells.size() > 3 ? cells[3] : std::string{});
  });
  return out;
}

std::string decisions_to_csv(const std::vector<ScreeningDecision>& decisions) {
  std::ostringstream os;
  os << "bundle_id,has_data,has_equation,rationale\n";
  for (const auto& d : decisions)
    os << csv_cell(d.bundle_id()) << ',' << (d.has_data() ? 1 : 0) << ','
       << (d.has_equation() ? 1 : 0) << ',' << csv_cell(d.rationale()) << '\n';
  return os.str();
}

namespace {
template <typename F>
nlohmann::json maybe(F&& f, const ConfusionCounts& c) {
  try {
    return f(c);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UndefinedMetric) throw;
    return nullptr;
  }
}
}  // namespace

nlohmann::json metrics_json(const ConfusionCounts& c) {
  return {{"confusion", c.to_json()},
          {"precision", maybe(precision, c)},
          {"recall", maybe(recall, c)},
          {"f1", maybe(static_cast<double (*)(const ConfusionCounts&)>(f1), c)},
          {"accuracy", maybe(accuracy, c)}};
}

std::string metrics_text(const ConfusionCounts& c) {
  auto j = metrics_json(c);
  std::ostringstream os;
  os << "                 truth relevant   truth irrelevant\n";
  os << "  passed         " << c.tp << std::string(17 - std::to_string(c.tp).size(), ' ') << c.fp << '\n';
  os << "  rejected       " << c.fn << std::string(17 - std::to_string(c.fn).size(), ' ') << c.tn << '\n';
  for (const char* name : {"precision", "recall", "f1", "accuracy"}) {
    os << "  " << name << std::string(11 - std::string(name).size(), ' ');
    if (j[name].is_null()) {
      os << "undefined\n";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", j[name].get<double>());
      os << buf << '\n';
    }
  }
  return os.str();
}

}  // namespace creepdb::screening
