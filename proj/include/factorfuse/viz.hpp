#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factorfuse/inference.hpp"

namespace factorfuse::viz {

enum class Panel { Tree, Response, Gic, GlobalTest };
enum class ResponsePanel { Frequency, Means, Boxplot, Proportion, Survival };
enum class NodesSpacing { Equal, Effects };

/// "frequency", "means", "boxplot", "proportion", "survival". The tukey,
/// heatmap and profile panels are rejected with IncompatiblePanel.
ResponsePanel parse_response_panel(std::string_view name);
const char* response_panel_name(ResponsePanel panel);
NodesSpacing parse_nodes_spacing(std::string_view name);

/// Throws IncompatiblePanel when `panel` cannot summarise `family`.
void check_compatible(ResponsePanel panel, Family family);

/// The panel a family gets when none is requested.
ResponsePanel default_response_panel(Family family);

/// Built-in palettes: "default" (12 colours) and "Dark2" (8 colours).
const std::vector<std::string>& palette_colors(std::string_view name);

struct PlotSpec {
  std::vector<Panel> panels{Panel::Tree, Panel::Response, Panel::Gic, Panel::GlobalTest};
  ResponsePanel response = ResponsePanel::Frequency;
  NodesSpacing spacing = NodesSpacing::Equal;
  bool panel_grid = false;
  bool show_split = false;
  double penalty = 2.0;
  std::string palette = "default";
  std::string title;
};

/// "*" below 0.05, "**" below 0.01, "***" below 0.001, else empty.
std::string stars_for(double pvalue);

struct TreeLeaf {
  int level = 0;
  std::string label;
  double y = 0.0;
  double summary = 0.0;  // ordering statistic of the level
  std::string color;
};

struct TreeJoin {
  int step = 0;
  std::string left, right;  // child cluster labels
  double x = 0.0;           // post-merge log-likelihood
  double y = 0.0;
  double left_x = 0.0, left_y = 0.0;
  double right_x = 0.0, right_y = 0.0;
  double pvalue = 1.0;  // against the previous model
  std::string stars;
  std::string color;
};

/// Dendrogram in data units: x is log-likelihood, y the node spacing axis.
struct TreeLayout {
  std::vector<TreeLeaf> leaves;  // top to bottom
  std::vector<TreeJoin> joins;   // by step
  double full_loglik = 0.0;
  double min_loglik = 0.0;
  int cut_step = 0;
  std::vector<double> grid;       // gridline positions on the loglik axis
  std::optional<double> split;    // cut position on the loglik axis
};

TreeLayout layout_tree(const MergingPath& path, const std::vector<HistoryRow>& history,
                       const ResponseData& data, const Grouping& grouping, const PlotSpec& spec);

struct ResponseRow {
  std::string label;
  std::string color;
  double count = 0.0;  // observations in the cluster
  double value = 0.0;  // mean or proportion
  double low = 0.0, high = 0.0;  // means: 95% normal-theory interval
  std::vector<double> five_numbers;       // boxplot: min, q1, median, q3, max
  std::vector<SurvivalStep> curve;        // survival: Kaplan-Meier steps
};

struct Box {
  double x = 0.0, y = 0.0, width = 600.0, height = 400.0;
};

struct ResponsePanelContent {
  ResponsePanel kind = ResponsePanel::Frequency;
  std::vector<ResponseRow> rows;
  std::string svg;  // fragment, no root element
};

/// One row per cluster of `partition`, in order; `colors[i]` styles row i.
ResponsePanelContent render_response_panel(const ResponseData& data, const Grouping& grouping,
                                           const Partition& partition, ResponsePanel kind,
                                           const std::vector<std::string>& colors, const Box& box = {});

std::string render_merging_path_svg(const MergingPath& path, const std::vector<HistoryRow>& history,
                                    const GicProfile& gic, const ResponseData& data,
                                    const Grouping& grouping, const PlotSpec& spec);

std::string render_gic_svg(const GicProfile& gic);

}  // namespace factorfuse::viz
