#include "fspde/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fspde::report_io {

namespace {
using ordered_json = nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

ordered_json config_echo_json(const config::RunConfig& cfg) {
  ordered_json j;
  for (const auto& [k, v] : config::echo(cfg)) j[k] = v;
  return j;
}
}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

void write_report_json(const std::string& path,
                       const experiments::ConvergenceReport& rep,
                       const config::RunConfig& cfg) {
  ordered_json j;
  j["study"] = rep.study;
  j["axis"] = rep.axis;
  j["error"] = rep.errors;
  j["stderr"] = rep.stderrs;
  j["slope"] = rep.slope;
  j["ci"] = rep.ci_halfwidth;
  j["theory_slope"] = rep.theory_slope;
  j["n_mc"] = rep.n_mc;
  j["seeds"]["base"] = rep.base_seed;
  j["seeds"]["derivation"] = "splitmix64(seed, tag='SAMPLE', index)";
  j["seeds"]["samples"] = rep.sample_seeds;
  j["failed_samples"] = rep.failed_samples;
  j["reduction"] = rep.reduction;
  j["config"] = config_echo_json(cfg);
  write_text(path, j.dump(2) + "\n");
}

void write_report_csv(const std::string& path,
                      const experiments::ConvergenceReport& rep) {
  std::string out = "level,axis,error,stderr\n";
  for (size_t i = 0; i < rep.axis.size(); ++i) {
    out += std::to_string(i) + "," + format_double(rep.axis[i]) + "," +
           format_double(rep.errors[i]) + "," + format_double(rep.stderrs[i]) +
           "\n";
  }
  write_text(path, out);
}

void write_trajectory_csv(const std::string& path, const scheme::Trajectory& t) {
  std::string out = "step,time,node,value\n";
  for (Eigen::Index m = 0; m < t.states.rows(); ++m)
    for (Eigen::Index k = 0; k < t.states.cols(); ++k)
      out += std::to_string(m) + "," + format_double(t.grid(m)) + "," +
             std::to_string(k) + "," + format_double(t.states(m, k)) + "\n";
  write_text(path, out);
}

void write_path_csv(const std::string& path, const noise::NoisePath& p) {
  std::string out = "mode,step,wiener_increment,fbm_increment\n";
  for (Eigen::Index i = 0; i < p.wiener.rows(); ++i)
    for (Eigen::Index j = 0; j < p.wiener.cols(); ++j)
      out += std::to_string(i + 1) + "," + std::to_string(j) + "," +
             format_double(p.wiener(i, j)) + "," + format_double(p.fbm(i, j)) +
             "\n";
  write_text(path, out);
}

void write_operator_csv(const std::string& path, const Eigen::VectorXd& sub,
                        const Eigen::VectorXd& diag,
                        const Eigen::VectorXd& super) {
  std::string out = "row,col,value\n";
  const Eigen::Index n = diag.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0)
      out += std::to_string(i) + "," + std::to_string(i - 1) + "," +
             format_double(sub(i - 1)) + "\n";
    out += std::to_string(i) + "," + std::to_string(i) + "," +
           format_double(diag(i)) + "\n";
    if (i + 1 < n)
      out += std::to_string(i) + "," + std::to_string(i + 1) + "," +
             format_double(super(i)) + "\n";
  }
  write_text(path, out);
}

void write_ml_check_csv(const std::string& path,
                        const experiments::MlCheckReport& rep) {
  std::string out = "alpha,beta,x,rel_err_oracle,rel_err_recurrence\n";
  for (const auto& r : rep.rows)
    out += format_double(r.alpha) + "," + format_double(r.beta) + "," +
           format_double(r.x) + "," + format_double(r.rel_err_oracle) + "," +
           format_double(r.rel_err_recurrence) + "\n";
  write_text(path, out);
}

void write_ml_check_json(const std::string& path,
                         const experiments::MlCheckReport& rep,
                         const config::RunConfig& cfg) {
  ordered_json j;
  j["worst_oracle"] = rep.worst_oracle;
  j["worst_recurrence"] = rep.worst_recurrence;
  j["worst_identity"] = rep.worst_identity;
  j["pass"] = rep.pass;
  j["rows"] = rep.rows.size();
  j["config"] = config_echo_json(cfg);
  write_text(path, j.dump(2) + "\n");
}

}  // namespace fspde::report_io
