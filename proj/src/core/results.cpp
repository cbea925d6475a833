#include "mtt/results.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mtt/errors.hpp"

namespace mtt {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string results_csv(std::span<const ResultRow> rows) {
  std::string out = "experiment,curve,x_name,x_value,y_name,y_value,std_error,n_samples,seed\n";
  for (const auto& r : rows) {
    out += r.experiment + ',' + r.curve + ',' + r.x_name + ',' + real(r.x_value) + ',' + r.y_name + ',' +
           real(r.y_value) + ',' + real(r.std_error) + ',' + std::to_string(r.n_samples) + ',' +
           std::to_string(r.seed) + '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ResourceError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ResourceError("failed while writing '" + path + "'");
}

}  // namespace mtt
