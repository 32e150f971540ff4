#include "factorfuse/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace factorfuse::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

bool is_missing(const std::string& field) { return field.empty() || field == "NA"; }

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidData,
                "row " + std::to_string(row) + ": column '" + column + "' holds non-numeric value '" + field + "'");
  }
  return v;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw Error(ErrorCode::InvalidData, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - table.header.begin());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidData, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
}

bool is_vowel(char c) {
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return true;
    default: return false;
  }
}

std::string abbreviate(const std::string& name) {
  if (name.size() <= 6) return name;
  std::vector<std::size_t> picked{0};
  for (std::size_t i = 1; i < name.size() && picked.size() < 4; ++i) {
    if (std::isalnum(static_cast<unsigned char>(name[i])) && !is_vowel(name[i])) picked.push_back(i);
  }
  for (std::size_t i = 1; i < name.size() && picked.size() < 4; ++i) {
    if (std::isalnum(static_cast<unsigned char>(name[i])) && is_vowel(name[i])) picked.push_back(i);
  }
  std::sort(picked.begin(), picked.end());
  std::string out;
  for (auto i : picked) out += name[i];
  return out;
}

bool family_is(const RunConfig& config, std::string_view name) { return config.family == name; }

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t i = 0;
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) i = 3;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    if (!(record.size() == 1 && record[0].empty() && !field_started)) records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw Error(ErrorCode::InvalidData, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  if (records.empty()) throw Error(ErrorCode::InvalidData, "input has no header row");
  CsvTable table;
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size()) {
      throw Error(ErrorCode::InvalidData, "row " + std::to_string(r + 1) + " has " +
                                              std::to_string(table.rows[r].size()) + " fields, header has " +
                                              std::to_string(table.header.size()));
    }
  }
  return table;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, end);
}

std::vector<std::string> abbreviate_levels(const std::vector<std::string>& names) {
  std::set<std::string> taken;
  for (const auto& n : names) {
    if (n.size() <= 6) taken.insert(n);
  }
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (n.size() <= 6) {
      out.push_back(n);
      continue;
    }
    const auto base = abbreviate(n);
    auto candidate = base;
    for (int suffix = 2; taken.count(candidate); ++suffix) candidate = base + std::to_string(suffix);
    taken.insert(candidate);
    out.push_back(candidate);
  }
  return out;
}

LoadedData load_input(const RunConfig& config) {
  if (config.factor.empty()) throw Error(ErrorCode::InvalidArgument, "--factor is required");
  const bool survival = family_is(config, "survival");
  if (survival) {
    if (config.time_column.empty() || config.event_column.empty()) {
      throw Error(ErrorCode::InvalidArgument, "survival needs --time and --event");
    }
    if (!config.weights.empty()) throw Error(ErrorCode::InvalidArgument, "weights are not supported for survival");
  } else if (config.responses.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--response is required");
  }
  if (family_is(config, "binomial") && config.responses.size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "binomial takes exactly one --response");
  }

  const auto table = parse_csv(read_file(config.input));
  const auto factor = column_index(table, config.factor);
  std::vector<std::size_t> value_columns;
  std::vector<std::string> value_names = survival ? std::vector<std::string>{config.time_column, config.event_column}
                                                  : config.responses;
  for (const auto& name : value_names) value_columns.push_back(column_index(table, name));
  std::optional<std::size_t> weight_column;
  if (!config.weights.empty()) weight_column = column_index(table, config.weights);

  std::vector<std::size_t> dropped;
  std::vector<std::string> names;
  std::vector<double> values, weights;
  std::vector<int> events;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto number = r + 1;
    bool missing = is_missing(row[factor]);
    for (auto c : value_columns) missing = missing || is_missing(row[c]);
    if (weight_column) missing = missing || is_missing(row[*weight_column]);
    if (missing) {
      dropped.push_back(number);
      continue;
    }
    names.push_back(row[factor]);
    if (survival) {
      values.push_back(parse_number(row[value_columns[0]], number, value_names[0]));
      const double e = parse_number(row[value_columns[1]], number, value_names[1]);
      if (e != 0.0 && e != 1.0) {
        throw Error(ErrorCode::InvalidData, "row " + std::to_string(number) + ": event must be 0 or 1");
      }
      events.push_back(static_cast<int>(e));
    } else {
      for (std::size_t c = 0; c < value_columns.size(); ++c) {
        values.push_back(parse_number(row[value_columns[c]], number, value_names[c]));
      }
    }
    if (weight_column) weights.push_back(parse_number(row[*weight_column], number, config.weights));
  }
  if (names.empty()) throw Error(ErrorCode::InvalidData, "no complete rows in input");

  std::vector<std::string> levels(names);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  auto labels = abbreviate_levels(levels);
  for (auto& l : labels) l = "(" + l + ")";
  auto grouping = Grouping::from_names(names, levels, std::move(labels));

  auto data = [&] {
    if (survival) return ResponseData::survival(std::move(values), std::move(events));
    if (family_is(config, "binomial")) return ResponseData::binomial(std::move(values), std::move(weights));
    if (config.responses.size() >= 2) {
      return ResponseData::gaussian_nd(std::move(values), config.responses.size(), std::move(weights));
    }
    return ResponseData::gaussian(std::move(values), std::move(weights));
  }();
  return LoadedData{std::move(data), std::move(grouping), table.rows.size(), std::move(dropped)};
}

MergeResult analyse(const LoadedData& input, const RunConfig& config) {
  const auto strategy = parse_strategy(config.method);
  SelectionCriterion criterion;
  if (config.criterion == "gic") {
    criterion = SelectionCriterion::gic(config.value.value_or(config.plot.penalty));
  } else if (config.criterion == "pvalue") {
    criterion = SelectionCriterion::pvalue(config.value.value_or(0.05));
  } else if (config.criterion == "loglik") {
    if (!config.value) throw Error(ErrorCode::InvalidArgument, "--criterion loglik needs --value");
    criterion = SelectionCriterion::loglik_drop(*config.value);
  } else {
    throw Error(ErrorCode::InvalidArgument, "criterion must be gic, pvalue or loglik");
  }
  EngineOptions options;
  options.threads = config.threads;
  MergeResult result{merge_factors(input.data, input.grouping, strategy, options), {}, {}, criterion, 0, {}, {}};
  result.history = merging_history(result.path);
  result.gic = gic_profile(result.path, config.plot.penalty);
  result.chosen_step = cut_step(result.path, criterion);
  result.partition = optimal_partition_table(result.path, input.grouping, criterion);
  result.global = global_null_test(result.path);
  return result;
}

std::string history_csv(const std::vector<HistoryRow>& rows) {
  std::string out = "step,groupA,groupB,model,pvalVsFull,pvalVsPrevious\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "," + csv_field(r.group_a) + "," + csv_field(r.group_b) + "," +
           format_double(r.loglik) + "," + format_double(r.pval_vs_full) + "," + format_double(r.pval_vs_previous) +
           "\n";
  }
  return out;
}

std::string partition_csv(const std::vector<PartitionRow>& rows, const Grouping& grouping) {
  std::string out = "orig,pred,level\n";
  for (const auto& r : rows) {
    out += csv_field(r.orig) + "," + csv_field(r.pred) + "," +
           csv_field(grouping.levels[static_cast<std::size_t>(r.level)]) + "\n";
  }
  return out;
}

std::string result_json(const MergeResult& result, const LoadedData& input, const RunConfig& config) {
  const auto& path = result.path;
  const auto& grouping = input.grouping;
  ordered_json doc;
  doc["schemaVersion"] = 1;
  doc["input"] = {{"path", config.input.generic_string()},
                  {"family", family_name(path.family)},
                  {"method", strategy_name(path.strategy)},
                  {"factor", config.factor},
                  {"rowsRead", input.rows_read},
                  {"rowsAccepted", input.data.size()},
                  {"droppedRows", input.dropped_rows}};
  auto& levels = doc["levels"] = ordered_json::array();
  for (std::size_t l = 0; l < grouping.level_count(); ++l) {
    levels.push_back({{"name", grouping.levels[l]}, {"label", grouping.labels[l]}, {"count", grouping.counts[l]}});
  }
  ordered_json steps = ordered_json::array();
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    ordered_json clusters = ordered_json::array();
    for (const auto& c : path.steps[i].model.partition.clusters) clusters.push_back(c.label);
    steps.push_back({{"step", i},
                     {"groupA", path.steps[i].group_a},
                     {"groupB", path.steps[i].group_b},
                     {"loglik", path.steps[i].model.loglik},
                     {"clusters", clusters}});
  }
  ordered_json ordering = ordered_json::array();
  for (int l : path.ordering) ordering.push_back(grouping.levels[static_cast<std::size_t>(l)]);
  doc["path"] = {{"strategy", strategy_name(path.strategy)},
                 {"evaluations", path.evaluations},
                 {"ordering", ordering},
                 {"steps", steps}};
  auto& history = doc["history"] = ordered_json::array();
  for (const auto& r : result.history) {
    history.push_back({{"step", r.step},
                       {"groupA", r.group_a},
                       {"groupB", r.group_b},
                       {"model", r.loglik},
                       {"pvalVsFull", r.pval_vs_full},
                       {"pvalVsPrevious", r.pval_vs_previous}});
  }
  ordered_json gic_rows = ordered_json::array();
  for (std::size_t i = 0; i < result.gic.rows.size(); ++i) {
    const auto& g = result.gic.rows[i];
    gic_rows.push_back({{"step", i}, {"loglik", g.loglik}, {"clusters", g.clusters}, {"gic", g.gic}});
  }
  doc["gic"] = {{"penalty", result.gic.penalty}, {"argminStep", result.gic.argmin_step}, {"rows", gic_rows}};
  doc["criterion"] = {{"name", criterion_name(result.criterion.kind)},
                      {"value", result.criterion.value},
                      {"step", result.chosen_step}};
  auto& partition = doc["partition"] = ordered_json::array();
  for (const auto& r : result.partition) {
    partition.push_back({{"level", grouping.levels[static_cast<std::size_t>(r.level)]}, {"orig", r.orig}, {"pred", r.pred}});
  }
  doc["globalTest"] = {{"statistic", result.global.statistic}, {"df", result.global.df}, {"pvalue", result.global.pvalue}};
  return doc.dump(2) + "\n";
}

void cmd_merge(const RunConfig& config) {
  if (config.family != "gaussian" && config.family != "binomial" && config.family != "survival") {
    throw Error(ErrorCode::InvalidArgument, "family must be gaussian, binomial or survival");
  }
  parse_strategy(config.method);
  auto spec = config.plot;
  const Family family = family_is(config, "survival")   ? Family::Survival
                        : family_is(config, "binomial") ? Family::Binomial
                        : config.responses.size() >= 2  ? Family::GaussianNd
                                                        : Family::Gaussian1d;
  spec.response = config.response_panel ? viz::parse_response_panel(*config.response_panel)
                                        : viz::default_response_panel(family);
  viz::check_compatible(spec.response, family);
  viz::palette_colors(spec.palette);

  const auto input = load_input(config);
  const auto result = analyse(input, config);
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create '" + config.out_dir.string() + "'");
  write_file(config.out_dir / "result.json", result_json(result, input, config));
  write_file(config.out_dir / "history.csv", history_csv(result.history));
  write_file(config.out_dir / "partition.csv", partition_csv(result.partition, input.grouping));
  write_file(config.out_dir / "merging_path.svg",
             viz::render_merging_path_svg(result.path, result.history, result.gic, input.data, input.grouping, spec));
  write_file(config.out_dir / "gic.svg", viz::render_gic_svg(result.gic));
}

void cmd_fixture(const FixtureSpec& spec, const fs::path& out_dir) {
  const auto fixture = make_fixture(spec);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create '" + out_dir.string() + "'");
  write_file(out_dir / "fixture.csv", fixture.csv());
  write_file(out_dir / "truth.json", fixture.truth_json());
}

std::string cmd_bench(const BenchConfig& config) {
  if (config.kmax < 4) throw Error(ErrorCode::InvalidArgument, "kmax must be at least 4");
  if (config.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be at least 1");
  std::string out = "strategy,k,evaluations,wallMillis\n";
  for (int k = 4; k <= config.kmax; k *= 2) {
    FixtureSpec spec;
    spec.k = k;
    spec.n_per_group = config.n_per_group;
    spec.seed = config.seed;
    const auto fixture = make_fixture(spec);
    const auto grouping = fixture.grouping();
    for (auto strategy : {Strategy::Adaptive, Strategy::FastAdaptive, Strategy::Fixed, Strategy::FastFixed}) {
      std::size_t evaluations = 0;
      double total = 0.0;
      for (int r = 0; r < config.repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        evaluations = merge_factors(fixture.data, grouping, strategy, config.options).evaluations;
        total += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
      out += std::string(strategy_name(strategy)) + "," + std::to_string(k) + "," + std::to_string(evaluations) +
             "," + format_double(total / config.repeats) + "\n";
    }
  }
  return out;
}

int exit_code(const Error& error) {
  switch (error.category()) {
    case ErrorClass::Config: return 2;
    case ErrorClass::Data: return 3;
    case ErrorClass::Numerical: return 4;
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Likelihood-based merging of factor levels", "factorfuse"};
  app.require_subcommand(1);

  RunConfig merge;
  std::string response_panel, spacing = "equal";
  auto* m = app.add_subcommand("merge", "Build the merging path for one response and factor");
  m->add_option("--input", merge.input, "CSV file with a header row")->required();
  m->add_option("--family", merge.family, "gaussian, binomial or survival")->capture_default_str();
  m->add_option("--response", merge.responses, "Response column; repeat for a multivariate gaussian");
  m->add_option("--time", merge.time_column, "Survival time column");
  m->add_option("--event", merge.event_column, "Survival event column (0/1)");
  m->add_option("--factor", merge.factor, "Grouping column")->required();
  m->add_option("--weights", merge.weights, "Observation weight column");
  m->add_option("--method", merge.method, "adaptive, fast-adaptive, fixed or fast-fixed")->capture_default_str();
  m->add_option("--criterion", merge.criterion, "gic, pvalue or loglik")->capture_default_str();
  m->add_option("--value", merge.value, "Penalty, p-value or log-likelihood threshold for the criterion");
  m->add_option("--response-panel", response_panel, "frequency, means, boxplot, proportion or survival");
  m->add_option("--nodes-spacing", spacing, "equal or effects")->capture_default_str();
  m->add_flag("--panel-grid", merge.plot.panel_grid, "Gridlines at chi-square 0.95 quantile steps");
  m->add_flag("--show-split", merge.plot.show_split, "Mark the chosen cut");
  m->add_option("--penalty", merge.plot.penalty, "GIC penalty used for colours and the GIC panel")->capture_default_str();
  m->add_option("--palette", merge.plot.palette, "default or Dark2")->capture_default_str();
  m->add_option("--title", merge.plot.title, "Plot title");
  m->add_option("--out", merge.out_dir, "Output directory")->capture_default_str();
  m->add_option("--threads", merge.threads, "Worker threads (0: automatic)");

  FixtureSpec fixture;
  std::string kind = "gaussian";
  fs::path fixture_out = ".";
  auto* f = app.add_subcommand("fixture", "Write a synthetic dataset with a planted partition");
  f->add_option("--kind", kind, "gaussian, binomial, survival or gaussianNd")->capture_default_str();
  f->add_option("--k", fixture.k, "Number of levels")->capture_default_str();
  f->add_option("--n", fixture.n_per_group, "Rows per level")->capture_default_str();
  f->add_option("--separation", fixture.separation, "Gap between planted clusters")->capture_default_str();
  f->add_option("--clusters", fixture.clusters, "Planted clusters (0: one per level)")->capture_default_str();
  f->add_option("--proportions", fixture.proportions, "Binomial success rate per planted cluster");
  f->add_option("--dim", fixture.dim, "Response dimension for gaussianNd")->capture_default_str();
  f->add_option("--seed", fixture.seed, "Random seed")->capture_default_str();
  f->add_option("--out", fixture_out, "Output directory")->capture_default_str();

  BenchConfig bench;
  fs::path bench_out;
  auto* b = app.add_subcommand("bench", "Count model evaluations and time every strategy");
  b->add_option("--kmax", bench.kmax, "Largest number of levels (k doubles from 4)")->capture_default_str();
  b->add_option("--n", bench.n_per_group, "Rows per level")->capture_default_str();
  b->add_option("--repeats", bench.repeats, "Timed runs per configuration")->capture_default_str();
  b->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  b->add_option("--threads", bench.options.threads, "Worker threads (0: automatic)");
  b->add_option("--out", bench_out, "CSV file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (m->parsed()) {
      if (!response_panel.empty()) merge.response_panel = response_panel;
      merge.plot.spacing = viz::parse_nodes_spacing(spacing);
      cmd_merge(merge);
    } else if (f->parsed()) {
      fixture.kind = parse_fixture_kind(kind);
      cmd_fixture(fixture, fixture_out);
    } else {
      const auto csv = cmd_bench(bench);
      if (bench_out.empty()) {
        out << csv;
      } else {
        write_file(bench_out, csv);
      }
    }
  } catch (const Error& e) {
    err << "factorfuse: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "factorfuse: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace factorfuse::cli
