#include "iapun/bench/records.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

#include "iapun/errors.hpp"
#include "json.hpp"

namespace iapun::bench {

namespace {

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw Error("records: bad number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw Error("records: bad integer '" + s + "'");
  return v;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits CSV text into records of fields, honoring quoted fields.
std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      any = true;
    } else if (c == '\n') {
      fields.push_back(std::move(cur));
      cur.clear();
      lines.push_back(std::move(fields));
      fields.clear();
      any = false;
    } else if (c != '\r') {
      cur += c;
      any = true;
    }
  }
  if (quoted) throw Error("records: unterminated quoted field");
  if (any) {
    fields.push_back(std::move(cur));
    lines.push_back(std::move(fields));
  }
  return lines;
}

constexpr std::size_t kRecordColumns = 11;
constexpr std::size_t kWallColumn = 10;

}  // namespace

bool EpochRow::operator==(const EpochRow& o) const {
  return epoch == o.epoch && t_k == o.t_k && flag == o.flag && branch == o.branch &&
         same(descent, o.descent) && cumulative == o.cumulative;
}

bool RunRecord::operator==(const RunRecord& o) const {
  return solver == o.solver && instance == o.instance && same(eps, o.eps) &&
         status == o.status && message == o.message && totals == o.totals &&
         epochs == o.epochs && same(final_grad_norm, o.final_grad_norm) &&
         same(wall_time_s, o.wall_time_s) && rows == o.rows;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "solver",  "instance", "eps",     "status",          "message",     "total_f",
      "total_gx", "total_gy", "epochs", "final_grad_norm", "wall_time_s", "epoch",
      "t_k",     "flag",     "branch",  "descent",         "cum_f",       "cum_gx",
      "cum_gy"};
  return cols;
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const RunRecord& r : records) {
    std::ostringstream head;
    head << quote(r.solver) << ',' << quote(r.instance) << ',' << fmt_double(r.eps) << ','
         << quote(r.status) << ',' << quote(r.message) << ',' << r.totals.f << ','
         << r.totals.gx << ',' << r.totals.gy << ',' << r.epochs << ','
         << fmt_double(r.final_grad_norm) << ',' << fmt_double(r.wall_time_s);
    if (r.rows.empty()) {
      out << head.str() << ",,,,,,,,\n";
      continue;
    }
    for (const EpochRow& e : r.rows) {
      out << head.str() << ',' << e.epoch << ',' << e.t_k << ',' << quote(e.flag) << ','
          << quote(e.branch) << ',' << fmt_double(e.descent) << ',' << e.cumulative.f << ','
          << e.cumulative.gx << ',' << e.cumulative.gy << '\n';
    }
  }
  return out.str();
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
  const auto lines = split_csv(text);
  if (lines.empty() || lines[0] != csv_columns()) throw Error("records: unexpected CSV header");
  std::vector<RunRecord> out;
  std::vector<std::string> prev_head;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& f = lines[li];
    if (f.size() != csv_columns().size()) {
      throw Error("records: line " + std::to_string(li + 1) + " has the wrong field count");
    }
    std::vector<std::string> head(f.begin(), f.begin() + kRecordColumns);
    const bool has_row = !f[kRecordColumns].empty();
    if (out.empty() || head != prev_head || !has_row || out.back().rows.empty()) {
      RunRecord r;
      r.solver = f[0];
      r.instance = f[1];
      r.eps = parse_double(f[2]);
      r.status = f[3];
      r.message = f[4];
      r.totals = {parse_int(f[5]), parse_int(f[6]), parse_int(f[7])};
      r.epochs = static_cast<int>(parse_int(f[8]));
      r.final_grad_norm = parse_double(f[9]);
      r.wall_time_s = parse_double(f[10]);
      out.push_back(std::move(r));
      prev_head = std::move(head);
    }
    if (has_row) {
      EpochRow e;
      e.epoch = static_cast<int>(parse_int(f[11]));
      e.t_k = static_cast<int>(parse_int(f[12]));
      e.flag = f[13];
      e.branch = f[14];
      e.descent = parse_double(f[15]);
      e.cumulative = {parse_int(f[16]), parse_int(f[17]), parse_int(f[18])};
      out.back().rows.push_back(std::move(e));
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json put(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double take(const nlohmann::ordered_json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

nlohmann::ordered_json put(const OracleCounts& c) {
  return {{"f", c.f}, {"gx", c.gx}, {"gy", c.gy}};
}

OracleCounts take_counts(const nlohmann::ordered_json& j) {
  return {j.at("f").get<std::int64_t>(), j.at("gx").get<std::int64_t>(),
          j.at("gy").get<std::int64_t>()};
}

}  // namespace

std::string to_json(const std::vector<RunRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const RunRecord& r : records) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const EpochRow& e : r.rows) {
      rows.push_back({{"epoch", e.epoch},
                      {"t_k", e.t_k},
                      {"flag", e.flag},
                      {"branch", e.branch},
                      {"descent", put(e.descent)},
                      {"cumulative", put(e.cumulative)}});
    }
    arr.push_back({{"solver", r.solver},
                   {"instance", r.instance},
                   {"eps", put(r.eps)},
                   {"status", r.status},
                   {"message", r.message},
                   {"totals", put(r.totals)},
                   {"epochs", r.epochs},
                   {"final_grad_norm", put(r.final_grad_norm)},
                   {"wall_time_s", put(r.wall_time_s)},
                   {"rows", std::move(rows)}});
  }
  return arr.dump(2) + "\n";
}

std::vector<RunRecord> records_from_json(const std::string& text) {
  std::vector<RunRecord> out;
  try {
    const auto arr = nlohmann::ordered_json::parse(text);
    for (const auto& j : arr) {
      RunRecord r;
      r.solver = j.at("solver").get<std::string>();
      r.instance = j.at("instance").get<std::string>();
      r.eps = take(j.at("eps"));
      r.status = j.at("status").get<std::string>();
      r.message = j.at("message").get<std::string>();
      r.totals = take_counts(j.at("totals"));
      r.epochs = j.at("epochs").get<int>();
      r.final_grad_norm = take(j.at("final_grad_norm"));
      r.wall_time_s = take(j.at("wall_time_s"));
      for (const auto& e : j.at("rows")) {
        EpochRow row;
        row.epoch = e.at("epoch").get<int>();
        row.t_k = e.at("t_k").get<int>();
        row.flag = e.at("flag").get<std::string>();
        row.branch = e.at("branch").get<std::string>();
        row.descent = take(e.at("descent"));
        row.cumulative = take_counts(e.at("cumulative"));
        r.rows.push_back(std::move(row));
      }
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("records: bad JSON: ") + e.what());
  }
  return out;
}

std::string strip_wall_time(const std::string& csv) {
  std::ostringstream out;
  for (const auto& fields : split_csv(csv)) {
    for (std::size_t i = 0, col = 0; i < fields.size(); ++i) {
      if (i == kWallColumn) continue;
      out << (col++ ? "," : "") << quote(fields[i]);
    }
    out << '\n';
  }
  return out.str();
}

double slope_fit(const std::vector<RunRecord>& records, const std::string& solver,
                 const std::string& instance) {
  std::set<std::string> instances;
  for (const RunRecord& r : records) {
    if (r.solver == solver && r.success()) instances.insert(r.instance);
  }
  if (instance.empty() && instances.size() > 1) {
    throw PreconditionViolation("slope_fit: solver " + solver +
                                " has records on several instances; name one");
  }
  std::vector<double> xs, ys;
  for (const RunRecord& r : records) {
    if (r.solver != solver || !r.success()) continue;
    if (!instance.empty() && r.instance != instance) continue;
    const double calls = static_cast<double>(r.totals.gradients());
    if (!(calls > 0.0) || !(r.eps > 0.0)) continue;
    xs.push_back(std::log(1.0 / r.eps));
    ys.push_back(std::log(calls));
  }
  if (xs.size() < 3) {
    throw PreconditionViolation("slope_fit: insufficient points for " + solver + " (" +
                                std::to_string(xs.size()) + ", need 3)");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (!(sxx > 0.0)) throw PreconditionViolation("slope_fit: all points share one eps");
  return sxy / sxx;
}

}  // namespace iapun::bench
