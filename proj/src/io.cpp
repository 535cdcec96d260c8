#include "sparselog/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sparselog {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

namespace {

std::ofstream open_out(const fs::path& path) {
  ensure_directory(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

void write_json(const fs::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void write_dataset_csv(const fs::path& path, const Dataset& data) {
  auto out = open_out(path);
  for (int j = 0; j < data.d(); ++j) out << 'x' << j << ',';
  out << 'y' << (data.soft ? ",soft" : "") << '\n';
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.d(); ++j) out << format_double(data.X(i, j)) << ',';
    out << (data.y(i) > 0 ? "1" : "-1");
    if (data.soft) out << ',' << format_double((*data.soft)(i));
    out << '\n';
  }
}

Dataset read_dataset_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool has_soft = !header.empty() && header.back() == "soft";
  const int d = static_cast<int>(header.size()) - (has_soft ? 2 : 1);
  if (d < 1 || header[d] != "y") throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row");
    rows.push_back(std::move(row));
  }
  Dataset data;
  const int n = static_cast<int>(rows.size());
  data.X.resize(n, d);
  data.y.resize(n);
  Vec soft(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.X(i, j) = rows[i][j];
    data.y(i) = rows[i][d];
    if (data.y(i) != 1.0 && data.y(i) != -1.0) throw std::runtime_error("labels must be +-1");
    if (has_soft) soft(i) = rows[i][d + 1];
  }
  if (has_soft) data.soft = std::move(soft);
  return data;
}

json dataset_metadata(const TargetVector& target, const Dataset& data) {
  return json{{"d", target.d()},         {"s", target.s()},
              {"n", data.n()},           {"seed", data.seed},
              {"support", target.support()}, {"values", target.values()}};
}

TargetVector target_from_metadata(const json& meta) {
  return TargetVector::from_values(meta.at("d").get<int>(), meta.at("support").get<std::vector<int>>(),
                                   meta.at("values").get<std::vector<double>>());
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj, bool with_coordinates) {
  if (with_coordinates && traj.iterates.size() != traj.size())
    throw std::invalid_argument("trajectory has no recorded iterates");
  auto out = open_out(path);
  out << "t,train_loss,val_loss,norm_S,norm_Sc";
  const long d = with_coordinates && !traj.iterates.empty() ? traj.iterates.front().size() : 0;
  for (long j = 0; j < d; ++j) out << ",w_" << j;
  out << '\n';
  const bool has_val = traj.val_loss.size() == traj.size();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.times[k]) << ',' << format_double(traj.train_loss[k]) << ','
        << (has_val ? format_double(traj.val_loss[k]) : "") << ',' << format_double(traj.norm_S[k])
        << ',' << format_double(traj.norm_Sc[k]);
    for (long j = 0; j < d; ++j) out << ',' << format_double(traj.iterates[k](j));
    out << '\n';
  }
}

void write_envelope_csv(const fs::path& path, const SandwichReport& report) {
  auto out = open_out(path);
  out << "t,i,role,lower,upper,flow_value\n";
  for (const auto& r : report.rows)
    out << format_double(r.t) << ',' << r.i << ',' << (r.active ? "active" : "inactive") << ','
        << format_double(r.lower) << ',' << format_double(r.upper) << ','
        << format_double(r.flow_value) << '\n';
}

void write_chain_csv(const fs::path& path, const PosteriorChain& chain,
                     const std::vector<double>& excess) {
  if (excess.size() != chain.z.size()) throw std::invalid_argument("one excess value per sample");
  auto out = open_out(path);
  out << "idx,accept,logpost,znorm,excess\n";
  for (std::size_t k = 0; k < chain.z.size(); ++k)
    out << k << ',' << chain.accepted[k] << ',' << format_double(chain.logpost[k]) << ','
        << format_double(chain.z[k].norm()) << ',' << format_double(excess[k]) << '\n';
}

json to_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const RiskReport& r) {
  json j{{"value", r.value}, {"method", to_string(r.method)}, {"size", r.size}};
  if (r.gradient) j["gradient"] = to_json(*r.gradient);
  return j;
}

json to_json(const BoundReport& r) {
  json j{{"term_signal", r.term_signal}, {"term_noise", r.term_noise},
         {"active_total", r.active_total}, {"delta", r.delta},
         {"delta_ok", r.delta_ok},       {"eps_ok", r.eps_ok}};
  j["term_inactive"] = r.term_inactive ? json(*r.term_inactive) : json(nullptr);
  j["total"] = r.total ? json(*r.total) : json(nullptr);
  return j;
}

json to_json(const OracleReport& r) {
  return json{{"name", r.name},           {"status", r.pass ? "pass" : "fail"},
              {"discrepancy", r.discrepancy}, {"tolerance", r.tolerance},
              {"resources", r.resources}, {"detail", r.detail},
              {"seconds", r.seconds}};
}

json to_json(const std::vector<OracleReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

json to_json(const PosteriorEstimate& e) {
  return json{{"mean", e.mean}, {"std_error", e.std_error}, {"samples", e.samples}};
}

json to_json(const EnvelopeModel& m) {
  json j{{"d", m.d},
         {"s", m.s()},
         {"support", m.support},
         {"w_star", to_json(m.w_star)},
         {"a_star", m.a_star},
         {"w_min", m.w_min},
         {"i_min", m.i_min},
         {"zeta", to_json(m.zeta)},
         {"eps_curvature", m.eps_curvature},
         {"eps_ok", m.eps_ok()},
         {"nodes", m.nodes}};
  if (m.gamma) {
    j["gamma"] = *m.gamma;
    j["delta_margin"] = m.delta_margin;
    j["delta_ok"] = m.delta_ok();
  }
  return j;
}

}  // namespace sparselog
