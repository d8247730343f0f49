#pragma once

#include <string>

#include "fspde/config.hpp"
#include "fspde/experiments.hpp"
#include "fspde/scheme.hpp"

namespace fspde::report_io {

// All data files are byte-stable: fixed %.17g float formatting, no
// timestamps. Frozen column orders (the compatibility contract):
//   report.csv      level,axis,error,stderr
//   trajectory.csv  step,time,node,value
//   path.csv        mode,step,wiener_increment,fbm_increment
//   mass.csv etc.   row,col,value
//   ml_check.csv    alpha,beta,x,rel_err_oracle,rel_err_recurrence

std::string format_double(double x);

void ensure_directory(const std::string& dir);

void write_report_json(const std::string& path,
                       const experiments::ConvergenceReport& rep,
                       const config::RunConfig& cfg);
void write_report_csv(const std::string& path,
                      const experiments::ConvergenceReport& rep);

void write_trajectory_csv(const std::string& path, const scheme::Trajectory& t);

void write_path_csv(const std::string& path, const noise::NoisePath& p);

void write_operator_csv(const std::string& path, const Eigen::VectorXd& sub,
                        const Eigen::VectorXd& diag, const Eigen::VectorXd& super);

void write_ml_check_csv(const std::string& path,
                        const experiments::MlCheckReport& rep);
void write_ml_check_json(const std::string& path,
                         const experiments::MlCheckReport& rep,
                         const config::RunConfig& cfg);

}  // namespace fspde::report_io
