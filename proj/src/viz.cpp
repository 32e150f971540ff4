#include "factorfuse/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "factorfuse/error.hpp"

namespace factorfuse::viz {

namespace {

constexpr double kCanvasWidth = 1200.0;
constexpr double kCanvasHeight = 800.0;
constexpr double kPanelWidth = 600.0;
constexpr double kPanelHeight = 400.0;
const std::string kMuted = "#888888";

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  return s == "-0.0000" ? "0.0000" : s;
}

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Linear map from [lo, hi] onto [a, b]; a degenerate domain maps to the middle.
struct Scale {
  double lo, hi, a, b;
  double operator()(double v) const {
    if (hi - lo <= 0.0) return 0.5 * (a + b);
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

std::string line(double x1, double y1, double x2, double y2, const std::string& stroke,
                 const std::string& extra = {}) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
}

std::string text(double x, double y, std::string_view body, const std::string& extra = {}) {
  const std::string size = extra.find("font-size") == std::string::npos ? " font-size=\"11\"" : "";
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\"" + size + extra + ">" +
         escape(body) + "</text>\n";
}

std::string svg_open(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
         "\">\n<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"#ffffff\"/>\n";
}

double quantile7(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct TreeNode {
  int left = -1, right = -1;  // children; -1 for leaves
  int level = -1;
  double stat_sum = 0.0;
  int leaf_count = 0;
};

}  // namespace

ResponsePanel parse_response_panel(std::string_view name) {
  if (name == "frequency") return ResponsePanel::Frequency;
  if (name == "means") return ResponsePanel::Means;
  if (name == "boxplot") return ResponsePanel::Boxplot;
  if (name == "proportion") return ResponsePanel::Proportion;
  if (name == "survival") return ResponsePanel::Survival;
  if (name == "tukey" || name == "heatmap" || name == "profile") {
    throw Error(ErrorCode::IncompatiblePanel, "response panel '" + std::string(name) + "' is not implemented");
  }
  throw Error(ErrorCode::IncompatiblePanel, "unknown response panel '" + std::string(name) + "'");
}

const char* response_panel_name(ResponsePanel panel) {
  switch (panel) {
    case ResponsePanel::Frequency: return "frequency";
    case ResponsePanel::Means: return "means";
    case ResponsePanel::Boxplot: return "boxplot";
    case ResponsePanel::Proportion: return "proportion";
    case ResponsePanel::Survival: return "survival";
  }
  return "?";
}

NodesSpacing parse_nodes_spacing(std::string_view name) {
  if (name == "equal") return NodesSpacing::Equal;
  if (name == "effects") return NodesSpacing::Effects;
  throw Error(ErrorCode::InvalidArgument, "nodes spacing must be 'equal' or 'effects'");
}

void check_compatible(ResponsePanel panel, Family family) {
  bool ok = false;
  switch (panel) {
    case ResponsePanel::Frequency: ok = true; break;
    case ResponsePanel::Means:
    case ResponsePanel::Boxplot: ok = family == Family::Gaussian1d; break;
    case ResponsePanel::Proportion: ok = family == Family::Binomial; break;
    case ResponsePanel::Survival: ok = family == Family::Survival; break;
  }
  if (!ok) {
    throw Error(ErrorCode::IncompatiblePanel, std::string("response panel '") + response_panel_name(panel) +
                                                  "' does not apply to the " + family_name(family) + " family");
  }
}

ResponsePanel default_response_panel(Family family) {
  switch (family) {
    case Family::Gaussian1d: return ResponsePanel::Means;
    case Family::Binomial: return ResponsePanel::Proportion;
    case Family::Survival: return ResponsePanel::Survival;
    default: return ResponsePanel::Frequency;
  }
}

const std::vector<std::string>& palette_colors(std::string_view name) {
  static const std::vector<std::string> standard{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                                 "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
  static const std::vector<std::string> dark2{"#1B9E77", "#D95F02", "#7570B3", "#E7298A",
                                              "#66A61E", "#E6AB02", "#A6761D", "#666666"};
  if (name == "default") return standard;
  if (name == "Dark2") return dark2;
  throw Error(ErrorCode::InvalidArgument, "unknown palette '" + std::string(name) + "'");
}

std::string stars_for(double pvalue) {
  if (pvalue < 0.001) return "***";
  if (pvalue < 0.01) return "**";
  if (pvalue < 0.05) return "*";
  return "";
}

TreeLayout layout_tree(const MergingPath& path, const std::vector<HistoryRow>& history,
                       const ResponseData& data, const Grouping& grouping, const PlotSpec& spec) {
  const auto k = grouping.level_count();
  const auto stats = level_statistics(data, grouping, path.full());
  TreeLayout layout;
  layout.full_loglik = path.full().loglik;
  layout.min_loglik = layout.full_loglik;
  for (const auto& s : path.steps) layout.min_loglik = std::min(layout.min_loglik, s.model.loglik);

  // Rebuild the binary merge tree from the recorded labels.
  std::vector<TreeNode> nodes(k);
  std::map<std::string, int> by_label;
  for (std::size_t l = 0; l < k; ++l) {
    nodes[l].level = static_cast<int>(l);
    nodes[l].stat_sum = stats[l];
    nodes[l].leaf_count = 1;
    by_label[grouping.labels[l]] = static_cast<int>(l);
  }
  std::vector<int> join_node(path.steps.size(), -1);
  for (std::size_t i = 1; i < path.steps.size(); ++i) {
    const auto& s = path.steps[i];
    TreeNode n;
    n.left = by_label.at(s.group_a);
    n.right = by_label.at(s.group_b);
    n.stat_sum = nodes[static_cast<std::size_t>(n.left)].stat_sum + nodes[static_cast<std::size_t>(n.right)].stat_sum;
    n.leaf_count = nodes[static_cast<std::size_t>(n.left)].leaf_count + nodes[static_cast<std::size_t>(n.right)].leaf_count;
    nodes.push_back(n);
    join_node[i] = static_cast<int>(nodes.size() - 1);
    by_label.erase(s.group_a);
    by_label.erase(s.group_b);
    by_label[s.group_a + s.group_b] = join_node[i];
  }

  // Leaf order: depth-first, lower mean statistic first.
  std::vector<int> order;
  auto visit = [&](auto&& self, int id) -> void {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.left < 0) {
      order.push_back(n.level);
      return;
    }
    const auto& l = nodes[static_cast<std::size_t>(n.left)];
    const auto& r = nodes[static_cast<std::size_t>(n.right)];
    const bool swap = r.stat_sum / r.leaf_count < l.stat_sum / l.leaf_count;
    self(self, swap ? n.right : n.left);
    self(self, swap ? n.left : n.right);
  };
  visit(visit, join_node.back());

  const auto gic = gic_profile(path, spec.penalty);
  layout.cut_step = gic.argmin_step;
  const auto& cut = path.steps[static_cast<std::size_t>(layout.cut_step)].model.partition;
  const auto cut_of = cut.level_to_cluster(k);
  const auto& palette = palette_colors(spec.palette);
  std::map<int, std::string> cluster_color;
  for (int level : order) {
    const int c = cut_of[static_cast<std::size_t>(level)];
    if (!cluster_color.count(c)) cluster_color[c] = palette[cluster_color.size() % palette.size()];
  }

  std::vector<double> node_y(nodes.size(), 0.0), node_x(nodes.size(), layout.full_loglik);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto level = static_cast<std::size_t>(order[i]);
    TreeLeaf leaf;
    leaf.level = order[i];
    leaf.label = grouping.labels[level];
    leaf.summary = stats[level];
    leaf.y = spec.spacing == NodesSpacing::Equal ? static_cast<double>(i) : stats[level];
    leaf.color = cluster_color[cut_of[level]];
    node_y[level] = leaf.y;
    layout.leaves.push_back(leaf);
  }
  for (std::size_t i = 1; i < path.steps.size(); ++i) {
    const auto id = static_cast<std::size_t>(join_node[i]);
    const auto& n = nodes[id];
    const auto l = static_cast<std::size_t>(n.left), r = static_cast<std::size_t>(n.right);
    TreeJoin j;
    j.step = static_cast<int>(i);
    j.left = path.steps[i].group_a;
    j.right = path.steps[i].group_b;
    j.x = path.steps[i].model.loglik;
    j.left_x = node_x[l];
    j.left_y = node_y[l];
    j.right_x = node_x[r];
    j.right_y = node_y[r];
    j.y = 0.5 * (j.left_y + j.right_y);
    j.pvalue = history[i].pval_vs_previous;
    j.stars = stars_for(j.pvalue);
    if (static_cast<int>(i) <= layout.cut_step) {
      int first = nodes[l].level;
      for (std::size_t walk = l; first < 0; walk = static_cast<std::size_t>(nodes[walk].left)) first = nodes[walk].level;
      j.color = cluster_color[cut_of[static_cast<std::size_t>(first)]];
    } else {
      j.color = kMuted;
    }
    node_x[id] = j.x;
    node_y[id] = j.y;
    layout.joins.push_back(j);
  }

  if (spec.panel_grid) {
    const double interval = chi_square_quantile(0.05, 1) / 2.0;
    for (double g = layout.full_loglik; g >= layout.min_loglik - interval && layout.grid.size() < 1000; g -= interval) {
      layout.grid.push_back(g);
    }
  }
  if (spec.show_split) {
    const auto s = static_cast<std::size_t>(layout.cut_step);
    layout.split = s + 1 < path.steps.size()
                       ? 0.5 * (path.steps[s].model.loglik + path.steps[s + 1].model.loglik)
                       : path.steps[s].model.loglik;
  }
  return layout;
}

ResponsePanelContent render_response_panel(const ResponseData& data, const Grouping& grouping,
                                           const Partition& partition, ResponsePanel kind,
                                           const std::vector<std::string>& colors, const Box& box) {
  check_compatible(kind, data.family());
  ResponsePanelContent out;
  out.kind = kind;
  const auto k = grouping.level_count();
  const auto of_level = partition.level_to_cluster(k);
  const auto c = partition.size();
  out.rows.resize(c);
  std::vector<std::vector<double>> values(c);
  std::vector<double> weight(c, 0.0), weighted_sum(c, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto j = static_cast<std::size_t>(of_level[static_cast<std::size_t>(grouping.codes[i])]);
    out.rows[j].count += 1.0;
    weight[j] += data.weight(i);
    weighted_sum[j] += data.weight(i) * data.value(i);
    values[j].push_back(data.value(i));
  }
  for (std::size_t j = 0; j < c; ++j) {
    auto& row = out.rows[j];
    row.label = partition.clusters[j].label;
    row.color = colors.empty() ? kMuted : colors[j % colors.size()];
    switch (kind) {
      case ResponsePanel::Proportion:
        row.value = weighted_sum[j] / weight[j];
        break;
      case ResponsePanel::Boxplot: {
        auto v = values[j];
        std::sort(v.begin(), v.end());
        row.five_numbers = {v.front(), quantile7(v, 0.25), quantile7(v, 0.5), quantile7(v, 0.75), v.back()};
        break;
      }
      case ResponsePanel::Survival:
        row.curve = kaplan_meier(data, grouping, partition.clusters[j]);
        break;
      default:
        break;
    }
  }
  if (kind == ResponsePanel::Means) {
    const auto f = loglik_gaussian_1d(data, grouping, partition);
    const double sigma = std::sqrt(f.sigma2);
    for (std::size_t j = 0; j < c; ++j) {
      const double half = 1.96 * sigma / std::sqrt(f.weights[j]);
      out.rows[j].value = f.means[j];
      out.rows[j].low = f.means[j] - half;
      out.rows[j].high = f.means[j] + half;
    }
  }

  // geometry
  const double left = box.x + 90.0, right = box.x + box.width - 20.0;
  const double top = box.y + 40.0, bottom = box.y + box.height - 40.0;
  const double pitch = (bottom - top) / static_cast<double>(std::max<std::size_t>(c, 1));
  auto row_y = [&](std::size_t j) { return top + pitch * (static_cast<double>(j) + 0.5); };
  std::string& svg = out.svg;
  svg += text(box.x + 10.0, box.y + 20.0, std::string("Response: ") + response_panel_name(kind), " font-weight=\"bold\"");

  if (kind == ResponsePanel::Survival) {
    double tmax = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) tmax = std::max(tmax, data.time(i));
    const Scale sx{0.0, tmax, left, right};
    const Scale sy{0.0, 1.0, bottom, top};
    for (std::size_t j = 0; j < c; ++j) {
      const auto& row = out.rows[j];
      std::string d = "M" + num(sx(0.0)) + " " + num(sy(1.0));
      double prev = 1.0;
      for (std::size_t s = 1; s < row.curve.size(); ++s) {
        d += " H" + num(sx(row.curve[s].time)) + " V" + num(sy(row.curve[s].survival));
        prev = row.curve[s].survival;
      }
      d += " H" + num(sx(tmax));
      (void)prev;
      svg += "<path id=\"km-" + escape(row.label) + "\" d=\"" + d + "\" fill=\"none\" stroke=\"" + row.color +
             "\" stroke-width=\"1.5\"/>\n";
      svg += text(box.x + 10.0, row_y(j), row.label, " fill=\"" + row.color + "\"");
    }
    svg += line(left, bottom, right, bottom, "#000000");
    svg += line(left, top, left, bottom, "#000000");
    svg += text(left, bottom + 16.0, "0");
    svg += text(right - 30.0, bottom + 16.0, short_num(tmax));
    return out;
  }

  double lo = 0.0, hi = 1.0;
  if (kind == ResponsePanel::Frequency) {
    hi = 0.0;
    for (const auto& r : out.rows) hi = std::max(hi, r.count);
  } else if (kind == ResponsePanel::Means) {
    lo = out.rows.front().low;
    hi = out.rows.front().high;
    for (const auto& r : out.rows) {
      lo = std::min(lo, r.low);
      hi = std::max(hi, r.high);
    }
  } else if (kind == ResponsePanel::Boxplot) {
    lo = out.rows.front().five_numbers.front();
    hi = out.rows.front().five_numbers.back();
    for (const auto& r : out.rows) {
      lo = std::min(lo, r.five_numbers.front());
      hi = std::max(hi, r.five_numbers.back());
    }
  }
  const Scale sx{lo, hi, left, right};
  for (std::size_t j = 0; j < c; ++j) {
    const auto& r = out.rows[j];
    const double y = row_y(j);
    const std::string id = " id=\"row-" + escape(r.label) + "\"";
    svg += text(box.x + 10.0, y + 4.0, r.label, " fill=\"" + r.color + "\"");
    const double h = std::min(pitch * 0.6, 24.0);
    switch (kind) {
      case ResponsePanel::Frequency:
      case ResponsePanel::Proportion: {
        const double v = kind == ResponsePanel::Frequency ? r.count : r.value;
        svg += "<rect" + id + " x=\"" + num(sx(0.0)) + "\" y=\"" + num(y - h / 2) + "\" width=\"" +
               num(sx(v) - sx(0.0)) + "\" height=\"" + num(h) + "\" fill=\"" + r.color + "\"/>\n";
        svg += text(sx(v) + 4.0, y + 4.0, kind == ResponsePanel::Frequency ? short_num(v) : short_num(v));
        break;
      }
      case ResponsePanel::Means:
        svg += "<g" + id + ">\n" + line(sx(r.low), y, sx(r.high), y, r.color, " stroke-width=\"2\"") +
               "<circle cx=\"" + num(sx(r.value)) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"" + r.color + "\"/>\n</g>\n";
        break;
      case ResponsePanel::Boxplot: {
        const auto& q = r.five_numbers;
        svg += "<g" + id + ">\n" + line(sx(q[0]), y, sx(q[1]), y, r.color) + line(sx(q[3]), y, sx(q[4]), y, r.color) +
               "<rect x=\"" + num(sx(q[1])) + "\" y=\"" + num(y - h / 2) + "\" width=\"" + num(sx(q[3]) - sx(q[1])) +
               "\" height=\"" + num(h) + "\" fill=\"none\" stroke=\"" + r.color + "\"/>\n" +
               line(sx(q[2]), y - h / 2, sx(q[2]), y + h / 2, r.color, " stroke-width=\"2\"") + "</g>\n";
        break;
      }
      default:
        break;
    }
  }
  svg += line(left, bottom, right, bottom, "#000000");
  svg += text(left, bottom + 16.0, short_num(lo));
  svg += text(right - 30.0, bottom + 16.0, short_num(hi));
  return out;
}

namespace {

std::string tree_panel(const TreeLayout& layout, const Box& box) {
  const double left = box.x + 20.0, right = box.x + box.width - 170.0;
  const double top = box.y + 40.0, bottom = box.y + box.height - 40.0;
  double ymin = layout.leaves.front().y, ymax = ymin;
  for (const auto& l : layout.leaves) {
    ymin = std::min(ymin, l.y);
    ymax = std::max(ymax, l.y);
  }
  const Scale sx{layout.min_loglik, layout.full_loglik, left, right};
  const Scale sy{ymin, ymax, bottom, top};
  std::string svg;
  svg += text(box.x + 10.0, box.y + 20.0, "Merging path", " font-weight=\"bold\"");
  for (double g : layout.grid) {
    if (g < layout.min_loglik) continue;
    svg += line(sx(g), top, sx(g), bottom, "#dddddd", " class=\"grid\"");
  }
  for (const auto& j : layout.joins) {
    svg += "<g id=\"join-" + std::to_string(j.step) + "\" data-loglik=\"" + num(j.x) + "\" data-pvalue=\"" +
           num(j.pvalue) + "\" data-stars=\"" + j.stars + "\">\n";
    svg += "<path d=\"M" + num(sx(j.left_x)) + " " + num(sy(j.left_y)) + " H" + num(sx(j.x)) + " V" +
           num(sy(j.right_y)) + " H" + num(sx(j.right_x)) + "\" fill=\"none\" stroke=\"" + j.color +
           "\" stroke-width=\"1.5\"/>\n";
    if (!j.stars.empty()) svg += text(sx(j.x) - 14.0, sy(j.y) - 3.0, j.stars);
    svg += "</g>\n";
  }
  for (const auto& l : layout.leaves) {
    svg += "<g id=\"node-" + escape(l.label) + "\">\n<circle cx=\"" + num(sx(layout.full_loglik)) + "\" cy=\"" +
           num(sy(l.y)) + "\" r=\"3\" fill=\"" + l.color + "\"/>\n";
    svg += text(right + 8.0, sy(l.y) + 4.0, l.label + " " + short_num(l.summary), " fill=\"" + l.color + "\"");
    svg += "</g>\n";
  }
  if (layout.split) {
    svg += line(sx(*layout.split), top, sx(*layout.split), bottom, "#000000", " id=\"split\" stroke-dasharray=\"4 3\"");
  }
  svg += line(left, bottom, right, bottom, "#000000");
  svg += text(left, bottom + 16.0, short_num(layout.min_loglik));
  svg += text(right - 40.0, bottom + 16.0, short_num(layout.full_loglik));
  svg += text(0.5 * (left + right) - 30.0, bottom + 30.0, "log-likelihood");
  return svg;
}

std::string gic_body(const GicProfile& gic, const Box& box) {
  const double left = box.x + 50.0, right = box.x + box.width - 150.0;
  const double top = box.y + 40.0, bottom = box.y + box.height - 40.0;
  double xlo = gic.rows.front().loglik, xhi = xlo, ylo = gic.rows.front().gic, yhi = ylo;
  for (const auto& r : gic.rows) {
    xlo = std::min(xlo, r.loglik);
    xhi = std::max(xhi, r.loglik);
    ylo = std::min(ylo, r.gic);
    yhi = std::max(yhi, r.gic);
  }
  const Scale sx{xlo, xhi, left, right};
  const Scale sy{ylo, yhi, bottom, top};
  std::string svg;
  svg += text(box.x + 10.0, box.y + 20.0, "GIC (penalty " + short_num(gic.penalty) + ")", " font-weight=\"bold\"");
  std::string d;
  for (std::size_t i = 0; i < gic.rows.size(); ++i) {
    d += (i == 0 ? "M" : " L") + num(sx(gic.rows[i].loglik)) + " " + num(sy(gic.rows[i].gic));
  }
  svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"#999999\"/>\n";
  for (std::size_t i = 0; i < gic.rows.size(); ++i) {
    const auto& r = gic.rows[i];
    const bool best = static_cast<int>(i) == gic.argmin_step;
    svg += "<circle" + std::string(best ? " id=\"gic-best\"" : "") + " class=\"gic-dot\" data-step=\"" +
           std::to_string(i) + "\" data-loglik=\"" + num(r.loglik) + "\" data-gic=\"" + num(r.gic) + "\" cx=\"" +
           num(sx(r.loglik)) + "\" cy=\"" + num(sy(r.gic)) + "\" r=\"" + (best ? "5" : "3") + "\" fill=\"" +
           (best ? "#d62728" : "#1f77b4") + "\"/>\n";
  }
  const auto& best = gic.rows[static_cast<std::size_t>(gic.argmin_step)];
  const auto& largest = gic.rows.front();
  const auto& smallest = gic.rows.back();
  struct Label {
    double y;
    std::string body, attrs;
  };
  std::vector<Label> labels{{sy(largest.gic), "largest " + short_num(largest.gic), " id=\"gic-largest\""},
                            {sy(smallest.gic), "smallest " + short_num(smallest.gic), " id=\"gic-smallest\""},
                            {sy(best.gic), "best " + short_num(best.gic), " id=\"gic-best-label\" fill=\"#d62728\""}};
  std::stable_sort(labels.begin(), labels.end(), [](const Label& a, const Label& b) { return a.y < b.y; });
  for (std::size_t i = 1; i < labels.size(); ++i) labels[i].y = std::max(labels[i].y, labels[i - 1].y + 13.0);
  svg += line(right + 10.0, top, right + 10.0, bottom, "#000000");
  for (const auto& l : labels) svg += text(right + 16.0, l.y + 4.0, l.body, l.attrs);
  svg += line(left, bottom, right, bottom, "#000000");
  svg += text(left, bottom + 16.0, short_num(xlo));
  svg += text(right - 40.0, bottom + 16.0, short_num(xhi));
  svg += text(0.5 * (left + right) - 30.0, bottom + 30.0, "log-likelihood");
  return svg;
}

std::string global_panel(const GlobalTest& t, const Box& box) {
  std::string svg;
  svg += text(box.x + 10.0, box.y + 20.0, "Global LRT test", " font-weight=\"bold\"");
  svg += text(box.x + 30.0, box.y + 70.0, "statistic = " + num(t.statistic));
  svg += text(box.x + 30.0, box.y + 90.0, "df = " + std::to_string(t.df));
  char p[64];
  std::snprintf(p, sizeof p, "%.4g", t.pvalue);
  svg += text(box.x + 30.0, box.y + 110.0, std::string("p-value = ") + p);
  svg += text(box.x + 30.0, box.y + 140.0,
              t.pvalue < 0.05 ? "Groups differ (reject equality at 0.05)" : "No evidence that groups differ at 0.05",
              " id=\"verdict\"");
  return svg;
}

}  // namespace

std::string render_merging_path_svg(const MergingPath& path, const std::vector<HistoryRow>& history,
                                    const GicProfile& gic, const ResponseData& data, const Grouping& grouping,
                                    const PlotSpec& spec) {
  if (spec.panels.empty()) throw Error(ErrorCode::InvalidArgument, "no panels requested");
  auto wants = [&](Panel p) { return std::find(spec.panels.begin(), spec.panels.end(), p) != spec.panels.end(); };
  if (wants(Panel::Response)) check_compatible(spec.response, data.family());

  const auto layout = layout_tree(path, history, data, grouping, spec);
  std::string svg = svg_open(kCanvasWidth, kCanvasHeight);
  if (!spec.title.empty()) svg += text(10.0, 14.0, spec.title, " id=\"title\" font-size=\"13\"");

  const Box cell{0.0, 0.0, kPanelWidth, kPanelHeight};
  if (wants(Panel::Tree)) {
    svg += "<g id=\"panel-a\" transform=\"translate(0,0)\">\n" + tree_panel(layout, cell) + "</g>\n";
  }
  if (wants(Panel::Response)) {
    // rows top to bottom, matching the tree's leaves
    Partition rows;
    std::vector<std::string> colors;
    for (auto it = layout.leaves.rbegin(); it != layout.leaves.rend(); ++it) {
      rows.clusters.push_back({it->label, {it->level}});
      colors.push_back(it->color);
    }
    const auto content = render_response_panel(data, grouping, rows, spec.response, colors, cell);
    svg += "<g id=\"panel-b\" transform=\"translate(600,0)\">\n" + content.svg + "</g>\n";
  }
  if (wants(Panel::Gic)) {
    svg += "<g id=\"panel-c\" transform=\"translate(0,400)\">\n" + gic_body(gic, cell) + "</g>\n";
  }
  if (wants(Panel::GlobalTest)) {
    svg += "<g id=\"panel-d\" transform=\"translate(600,400)\">\n" + global_panel(global_null_test(path), cell) + "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_gic_svg(const GicProfile& gic) {
  return svg_open(kPanelWidth, kPanelHeight) + gic_body(gic, Box{}) + "</svg>\n";
}

}  // namespace factorfuse::viz
