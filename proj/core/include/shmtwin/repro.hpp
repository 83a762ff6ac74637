#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

/// Reproduction of the reference tables and figures with per-cell tolerances.
namespace shmtwin::repro {

struct Row {
  std::string item;
  double reference = 0.0;
  double computed = 0.0;
  std::string tolerance;  // "rel 0.5%", "abs 0.01", ">= 3650", "exact"
  bool pass = false;
};

struct Result {
  std::string target;
  std::vector<Row> rows;

  bool all_pass() const;
};

/// table1, table2_check, table3, table5, fig5, fig3_classes, validation_window
const std::vector<std::string>& targets();

/// Throws InvalidArgument for an unknown target. artifacts_dir, when not
/// empty, receives side outputs such as the lifetime curve.
Result run(const std::string& target, const std::filesystem::path& artifacts_dir = {});

/// Columns: target,item,reference,computed,tolerance,status
void write_csv(std::ostream& out, const Result& r, bool header = true);

}  // namespace shmtwin::repro
