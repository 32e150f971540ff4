#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "factorfuse/engine.hpp"
#include "factorfuse/error.hpp"
#include "factorfuse/fixtures.hpp"
#include "factorfuse/inference.hpp"
#include "factorfuse/viz.hpp"

namespace factorfuse::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180: quoted fields, doubled quotes, CRLF or LF line ends, embedded
/// newlines inside quotes. A leading UTF-8 byte order mark is skipped.
CsvTable parse_csv(const std::string& text);
std::string csv_field(const std::string& value);

/// Shortest round-trip decimal form.
std::string format_double(double value);

/// Display forms for level names: names of at most 6 characters stay as they
/// are, longer ones shrink to 4 characters (first character, then consonants,
/// then the remaining letters in order). Clashes get numeric suffixes.
std::vector<std::string> abbreviate_levels(const std::vector<std::string>& names);

struct RunConfig {
  std::filesystem::path input;
  std::string family = "gaussian";
  std::vector<std::string> responses;
  std::string time_column, event_column;
  std::string factor;
  std::string weights;
  std::string method = "adaptive";
  std::string criterion = "gic";
  std::optional<double> value;
  viz::PlotSpec plot;
  std::optional<std::string> response_panel;
  std::filesystem::path out_dir = ".";
  int threads = 0;
};

struct LoadedData {
  ResponseData data;
  Grouping grouping;
  std::size_t rows_read = 0;
  std::vector<std::size_t> dropped_rows;  // 1-based data record numbers
};

LoadedData load_input(const RunConfig& config);

struct MergeResult {
  MergingPath path;
  std::vector<HistoryRow> history;
  GicProfile gic;
  SelectionCriterion criterion;
  int chosen_step = 0;
  std::vector<PartitionRow> partition;
  GlobalTest global;
};

MergeResult analyse(const LoadedData& input, const RunConfig& config);

std::string history_csv(const std::vector<HistoryRow>& rows);
std::string partition_csv(const std::vector<PartitionRow>& rows, const Grouping& grouping);
std::string result_json(const MergeResult& result, const LoadedData& input, const RunConfig& config);

/// Writes result.json, history.csv, partition.csv, merging_path.svg and gic.svg.
void cmd_merge(const RunConfig& config);

void cmd_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir);

struct BenchConfig {
  int kmax = 32;
  int n_per_group = 10;
  int repeats = 1;
  std::uint64_t seed = 1;
  EngineOptions options;
};

/// CSV with header strategy,k,evaluations,wallMillis.
std::string cmd_bench(const BenchConfig& config);

/// 2 for configuration errors, 3 for data errors, 4 for numerical failures.
int exit_code(const Error& error);

/// Full command line front end; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace factorfuse::cli
