#include "curesurv/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace curesurv {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
  fields.push_back(trim(cur));
  return fields;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

double parse_number(const std::string& s, std::size_t line, const std::string& column) {
  if (is_missing(s)) throw DataError("line " + std::to_string(line) + ": missing value in column '" + column + "'");
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw DataError("line " + std::to_string(line) + ": column '" + column + "' has non-numeric value '" + s + "'");
  return v;
}

std::vector<std::string> json_string_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (v.is_string()) {
    // comma-separated, like the flag
    std::vector<std::string> out;
    std::stringstream ss(v.get<std::string>());
    for (std::string item; std::getline(ss, item, ',');)
      if (!trim(item).empty()) out.push_back(trim(item));
    return out;
  }
  return v.get<std::vector<std::string>>();
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("column '" + name + "' not found in the header");
  return static_cast<std::size_t>(std::distance(header.begin(), it));
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);  // BOM
    if (trim(line).empty()) continue;
    auto fields = split_record(line, line_no);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw DataError("empty file: no header row");
  if (t.rows.empty()) throw DataError("no data rows after the header");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

EngineChoice parse_engine(const std::string& name) {
  if (name == "freq" || name == "frequentist") return EngineChoice::Frequentist;
  if (name == "bayes" || name == "bayesian") return EngineChoice::Bayesian;
  if (name == "both") return EngineChoice::Both;
  throw std::invalid_argument("unknown engine '" + name + "' (expected freq, bayes or both)");
}

std::string engine_name(EngineChoice engine) {
  switch (engine) {
    case EngineChoice::Frequentist: return "freq";
    case EngineChoice::Bayesian: return "bayes";
    case EngineChoice::Both: return "both";
  }
  return "?";
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config '" + path.string() + "': " + e.what());
  }
  RunConfig c;
  if (j.contains("input")) c.input = j["input"].get<std::string>();
  if (j.contains("family")) c.model = parse_model(j["family"].get<std::string>());
  c.alpha_covariates = json_string_list(j, "alpha-covariates");
  c.beta_covariates = json_string_list(j, "beta-covariates");
  if (j.contains("time-column")) c.time_column = j["time-column"].get<std::string>();
  if (j.contains("event-column")) c.event_column = j["event-column"].get<std::string>();
  if (j.contains("stratum")) c.stratum_column = j["stratum"].get<std::string>();
  if (j.contains("engine")) c.engine = parse_engine(j["engine"].get<std::string>());
  if (j.contains("prior-variance")) c.prior_variance = j["prior-variance"].get<double>();
  if (j.contains("lambda-shape")) c.lambda_shape = j["lambda-shape"].get<double>();
  if (j.contains("lambda-rate")) c.lambda_rate = j["lambda-rate"].get<double>();
  if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"].get<std::string>());
  if (j.contains("iters")) c.iters = j["iters"].get<int>();
  if (j.contains("burnin")) c.burnin = j["burnin"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("level")) c.level = j["level"].get<double>();
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  if (j.contains("influence")) c.influence = j["influence"].get<bool>();
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  return c;
}

void RunConfig::validate() const {
  if (input.empty()) throw std::invalid_argument("no input file given");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (engine != EngineChoice::Frequentist && !(iters > burnin && burnin >= 0))
    throw std::invalid_argument("need iters > burnin >= 0");
  if (!(prior_variance > 0.0) || !(lambda_shape > 0.0) || !(lambda_rate > 0.0))
    throw std::invalid_argument("prior hyperparameters must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be non-negative");
}

SurvivalDataset dataset_from_table(const CsvTable& table, const RunConfig& config) {
  const std::size_t ti = table.column(config.time_column);
  const std::size_t ei = table.column(config.event_column);
  std::vector<std::size_t> ai, bi;
  for (const auto& c : config.alpha_covariates) ai.push_back(table.column(c));
  for (const auto& c : config.beta_covariates) bi.push_back(table.column(c));

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  SurvivalDataset d;
  d.t.resize(n);
  d.delta.resize(static_cast<std::size_t>(n));
  Eigen::MatrixXd xa(n, static_cast<Eigen::Index>(ai.size())), xb(n, static_cast<Eigen::Index>(bi.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    const std::size_t line = table.line_numbers[static_cast<std::size_t>(r)];
    const double t = parse_number(row[ti], line, config.time_column);
    if (!(t > 0.0))
      throw DataError("line " + std::to_string(line) + ": time must be positive, found " + row[ti]);
    d.t[r] = t;
    const double e = parse_number(row[ei], line, config.event_column);
    if (e != 0.0 && e != 1.0)
      throw DataError("line " + std::to_string(line) + ": event column '" + config.event_column + "' has value " +
                      row[ei] + " (expected 0 or 1)");
    d.delta[static_cast<std::size_t>(r)] = static_cast<int>(e);
    for (std::size_t j = 0; j < ai.size(); ++j)
      xa(r, static_cast<Eigen::Index>(j)) = parse_number(row[ai[j]], line, config.alpha_covariates[j]);
    for (std::size_t j = 0; j < bi.size(); ++j)
      xb(r, static_cast<Eigen::Index>(j)) = parse_number(row[bi[j]], line, config.beta_covariates[j]);
  }
  d.x = DesignMatrices::from_covariates(xa, xb, config.alpha_covariates, config.beta_covariates);
  d.validate();
  return d;
}

SurvivalDataset load_dataset(const std::filesystem::path& path, const RunConfig& config) {
  return dataset_from_table(read_csv(path), config);
}

std::vector<std::string> stratum_labels(const CsvTable& table, const std::string& column) {
  const std::size_t c = table.column(column);
  std::vector<std::string> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (is_missing(table.rows[r][c]))
      throw DataError("line " + std::to_string(table.line_numbers[r]) + ": missing stratum value");
    out.push_back(table.rows[r][c]);
  }
  return out;
}

void write_dataset(std::ostream& out, const SurvivalDataset& data) {
  std::vector<std::string> names = data.x.x1_names;
  std::vector<std::pair<int, Eigen::Index>> source;  // (block, column)
  for (std::size_t j = 0; j < data.x.x1_names.size(); ++j) source.emplace_back(1, static_cast<Eigen::Index>(j + 1));
  for (std::size_t j = 0; j < data.x.x2_names.size(); ++j) {
    if (std::find(names.begin(), names.end(), data.x.x2_names[j]) != names.end()) continue;
    names.push_back(data.x.x2_names[j]);
    source.emplace_back(2, static_cast<Eigen::Index>(j + 1));
  }
  out << "time,status";
  for (const auto& nm : names) out << ',' << nm;
  out << '\n';
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << format_double(data.t[i]) << ',' << data.delta[static_cast<std::size_t>(i)];
    for (const auto& [block, col] : source)
      out << ',' << format_double(block == 1 ? data.x.x1(i, col) : data.x.x2(i, col));
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const SurvivalDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dataset(out, data);
}

KMOverlay kaplan_meier(const SurvivalDataset& data, const std::vector<std::string>& labels, int grid_points) {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != data.size())
    throw std::invalid_argument("kaplan_meier: one stratum label per row required");
  if (data.size() == 0) throw std::invalid_argument("kaplan_meier: empty stratum 'all'");
  KMOverlay ov;
  if (labels.empty()) {
    KmSeries s;
    s.stratum = "all";
    for (Eigen::Index i = 0; i < data.size(); ++i) s.rows.push_back(i);
    ov.strata.push_back(std::move(s));
  } else {
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const auto& lab = labels[static_cast<std::size_t>(i)];
      auto it = std::find_if(ov.strata.begin(), ov.strata.end(), [&](const KmSeries& s) { return s.stratum == lab; });
      if (it == ov.strata.end()) {
        ov.strata.push_back(KmSeries{lab, {}, {}, {}, {}});
        it = std::prev(ov.strata.end());
      }
      it->rows.push_back(i);
    }
  }
  const double t_max = data.t.maxCoeff();
  std::vector<double> grid(static_cast<std::size_t>(std::max(grid_points, 2)));
  for (std::size_t g = 0; g < grid.size(); ++g) grid[g] = t_max * static_cast<double>(g) / static_cast<double>(grid.size() - 1);
  for (auto& s : ov.strata) {
    if (s.rows.empty()) throw std::invalid_argument("kaplan_meier: empty stratum '" + s.stratum + "'");
    std::vector<double> t;
    std::vector<int> d;
    for (Eigen::Index r : s.rows) {
      t.push_back(data.t[r]);
      d.push_back(data.delta[static_cast<std::size_t>(r)]);
    }
    s.km = curesurv::kaplan_meier(t, d);
    s.grid = grid;
  }
  return ov;
}

void attach_model_curves(KMOverlay& overlay, const ParamVector& theta, const SurvivalDataset& data) {
  const RegressionCoefficients coef = theta.coefficients();
  for (auto& s : overlay.strata) {
    std::vector<MOLaw> laws;
    for (Eigen::Index r : s.rows) laws.push_back(row_law(coef, data.x, r, theta.spec().model));
    s.model_surv.assign(s.grid.size(), 0.0);
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
      double acc = 0.0;
      for (const auto& law : laws) acc += std::exp(mo_logsurv(s.grid[g], law));
      s.model_surv[g] = acc / static_cast<double>(laws.size());
    }
  }
}

void write_km_overlay_csv(std::ostream& out, const KMOverlay& overlay) {
  out << "stratum,series,t,surv\n";
  for (const auto& s : overlay.strata) {
    for (std::size_t k = 0; k < s.km.time.size(); ++k)
      out << s.stratum << ",km," << format_double(s.km.time[k]) << ',' << format_double(s.km.surv[k]) << '\n';
    for (std::size_t g = 0; g < s.model_surv.size(); ++g)
      out << s.stratum << ",model," << format_double(s.grid[g]) << ',' << format_double(s.model_surv[g]) << '\n';
  }
}

}  // namespace curesurv
