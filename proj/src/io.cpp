#include "screenclean/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace screenclean {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, std::size_t line, std::size_t column) {
  double value = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                      ": '" + field + "' is not a finite number");
  }
  return value;
}

std::string num(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string one_based(const IndexSet& set, char sep = ';') {
  std::string out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k) out += sep;
    out += std::to_string(set[k] + 1);
  }
  return out;
}

std::vector<Index> one_based_vector(const IndexSet& set) {
  std::vector<Index> out;
  for (Index j : set) out.push_back(j + 1);
  return out;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split_fields(line);
  }
  if (header.empty()) throw Error(ErrorKind::Parse, "empty file: no header row");
  std::size_t y_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      if (y_col != header.size()) throw Error(ErrorKind::Parse, "column 'y' appears twice");
      y_col = c;
    }
  }
  if (y_col == header.size()) throw Error(ErrorKind::MissingColumn, "required response column 'y' not found");
  if (header.size() < 2) throw Error(ErrorKind::Parse, "no covariate columns");

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != y_col) names.push_back(header[c]);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) row.push_back(parse_number(fields[c], line_no, c + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::TooFewRows, "no data rows");

  const auto n = static_cast<Index>(rows.size());
  const auto p = static_cast<Index>(names.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    Index j = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == y_col) {
        y(i) = row[c];
      } else {
        x(i, j++) = row[c];
      }
    }
  }
  return Dataset(std::move(y), std::move(x), false, std::move(names));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str());
}

Dataset center_response(const Dataset& data) {
  Eigen::VectorXd y = data.y().array() - data.y().mean();
  return data.with_response(std::move(y));
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string provenance_line(std::uint64_t seed, const std::string& canonical_config) {
  return std::string("# screenclean ") + kVersion + " seed=" + std::to_string(seed) +
         " config=" + config_hash(canonical_config) + "\n";
}

std::string clean_table_csv(const PipelineResult& result, const Dataset& data, const std::string& provenance) {
  std::string out = provenance + "variable,name,coefficient,t,critical,kept\n";
  const auto& c = result.clean;
  for (std::size_t k = 0; k < c.s_hat.size(); ++k) {
    const Index j = c.s_hat[k];
    const bool kept = std::binary_search(c.d_hat.begin(), c.d_hat.end(), j);
    const auto row = static_cast<Index>(k);
    out += std::to_string(j + 1) + "," + data.name(j) + "," + num(c.coefficients(row)) + "," +
           num(c.t_values(row)) + "," + num(c.critical) + "," + (kept ? "1" : "0") + "\n";
  }
  return out;
}

std::string screen_path_csv(const PipelineResult& result, const std::string& provenance) {
  std::string out = provenance + "step,lambda,size,selected,coefficients\n";
  for (std::size_t k = 0; k < result.path.entries.size(); ++k) {
    const auto& e = result.path.entries[k];
    std::string coefs;
    for (std::size_t i = 0; i < e.selected.size(); ++i) {
      if (i) coefs += ';';
      coefs += num(e.coefficients(e.selected[i]));
    }
    out += std::to_string(k) + "," + num(e.lambda) + "," + std::to_string(e.selected.size()) + "," +
           one_based(e.selected) + "," + coefs + "\n";
  }
  return out;
}

std::string cv_curve_csv(const PipelineResult& result, const std::string& provenance) {
  std::string out = provenance + "step,lambda,size,l_hat,chosen\n";
  for (const auto& pt : result.cv_curve) {
    out += std::to_string(pt.path_index) + "," + num(pt.lambda) + "," + std::to_string(pt.support_size) + "," +
           num(pt.l_hat) + "," + (pt.path_index == result.chosen_index ? "1" : "0") + "\n";
  }
  return out;
}

std::string summary_json(const PipelineResult& result, const Dataset& data, const PipelineConfig& cfg) {
  using nlohmann::ordered_json;
  const auto& c = result.clean;
  ordered_json j;
  j["version"] = kVersion;
  j["n"] = data.n();
  j["p"] = data.p();
  j["screener"] = to_string(cfg.screener);
  j["splits"] = to_string(cfg.splits);
  j["alpha"] = cfg.alpha;
  j["seed"] = cfg.seed;
  j["k_n"] = result.k_n;
  j["chosen_step"] = result.chosen_index;
  j["chosen_lambda"] = result.chosen_lambda;
  if (std::isnan(c.critical)) {
    j["critical_value"] = nullptr;
  } else {
    j["critical_value"] = c.critical;
  }
  j["s_hat"] = one_based_vector(c.s_hat);
  j["d_hat"] = one_based_vector(c.d_hat);
  std::vector<std::string> s_names, d_names;
  for (Index v : c.s_hat) s_names.push_back(data.name(v));
  for (Index v : c.d_hat) d_names.push_back(data.name(v));
  j["s_hat_names"] = s_names;
  j["d_hat_names"] = d_names;
  j["sandwich"] = {{"lower", one_based_vector(c.d_hat)}, {"upper", one_based_vector(c.s_hat)}};
  j["perfect_fit"] = c.perfect_fit;
  std::vector<std::size_t> sizes;
  for (const auto& g : result.plan.groups) sizes.push_back(g.size());
  j["split_sizes"] = sizes;
  j["warnings"] = result.warnings;
  return j.dump(2) + "\n";
}

std::string table1_csv(const std::vector<Table1Row>& rows, const std::string& provenance) {
  static const char* methods[3] = {"lasso", "stepwise", "marginal"};
  std::string out = provenance + "splits,n,p,model";
  for (const char* stat : {"size", "power"}) {
    for (const char* m : methods) out += std::string(",") + stat + "_" + m;
  }
  for (const char* stat : {"se_size", "se_power"}) {
    for (const char* m : methods) out += std::string(",") + stat + "_" + m;
  }
  out += ",replicates,failures\n";
  for (const auto& row : rows) {
    out += std::string(row.spec.splits == SplitScheme::TriSplit ? "3" : "2") + "," + std::to_string(row.spec.n) +
           "," + std::to_string(row.spec.p) + "," + to_string(row.spec.kind);
    for (const auto& m : row.method) out += "," + num(m.size);
    for (const auto& m : row.method) out += "," + num(m.power_av);
    for (const auto& m : row.method) out += "," + num(m.se_size);
    for (const auto& m : row.method) out += "," + num(m.se_power);
    Index failures = 0;
    for (const auto& m : row.method) failures += m.failures;
    out += "," + std::to_string(row.method[0].replicates + row.method[0].failures) + "," +
           std::to_string(failures) + "\n";
  }
  return out;
}

std::string table2_csv(const std::vector<Table2Row>& rows, const std::string& provenance) {
  std::string out = provenance + "n,p,model,size,power,fpr,se_size,se_power,se_fpr,replicates,failures\n";
  for (const auto& row : rows) {
    const auto& r = row.row;
    out += std::to_string(row.spec.n) + "," + std::to_string(row.spec.p) + "," + to_string(row.spec.kind) + "," +
           num(r.size) + "," + num(r.power_av) + "," + num(r.fpr) + "," + num(r.se_size) + "," +
           num(r.se_power) + "," + num(r.se_fpr) + "," + std::to_string(r.replicates + r.failures) + "," +
           std::to_string(r.failures) + "\n";
  }
  return out;
}

std::string cells_csv(const std::vector<CellResult>& cells, const std::string& provenance) {
  std::string out = provenance +
                    "procedure,splits,n,p,model,alpha,size,power,fpr,coverage,se_size,se_power,se_fpr,"
                    "se_coverage,replicates,failures\n";
  for (const auto& c : cells) {
    const auto& r = c.row;
    const std::string splits = c.spec.procedure == Procedure::AdaptiveLasso ? "2" : to_string(c.spec.splits);
    out += to_string(c.spec.procedure) + "," + splits + "," + std::to_string(c.spec.model.n) + "," +
           std::to_string(c.spec.model.p) + "," + to_string(c.spec.model.kind) + "," + num(c.spec.alpha) + "," +
           num(r.size) + "," + num(r.power_av) + "," + num(r.fpr) + "," + num(r.coverage) + "," +
           num(r.se_size) + "," + num(r.se_power) + "," + num(r.se_fpr) + "," + num(r.se_coverage) + "," +
           std::to_string(r.replicates + r.failures) + "," + std::to_string(r.failures) + "\n";
  }
  return out;
}

std::string persistence_curve_csv(const PersistenceReport& report, const std::string& provenance) {
  std::string out = provenance + "n,radius,empirical_risk,population_risk,l1_norm\n";
  for (const auto& pt : report.curve) {
    out += std::to_string(pt.n) + "," + num(pt.radius) + "," + num(pt.empirical_risk) + "," +
           num(pt.population_risk) + "," + num(pt.l1_norm) + "\n";
  }
  return out;
}

std::string persistence_summary_csv(const PersistenceReport& report, const std::string& provenance) {
  std::string out = provenance + "n,omega,median_gap,mean_gap,max_gap,mean_radius,replicates\n";
  for (const auto& s : report.summary) {
    out += std::to_string(s.n) + "," + num(s.omega) + "," + num(s.median_gap) + "," + num(s.mean_gap) + "," +
           num(s.max_gap) + "," + num(s.mean_radius) + "," + std::to_string(s.replicates) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace screenclean
