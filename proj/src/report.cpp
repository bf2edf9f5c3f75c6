#include "fssam/report.hpp"

#include <cstdio>
#include <string>

namespace fssam {

namespace {

nlohmann::ordered_json counts_json(const PixelCounts& c) {
  nlohmann::ordered_json j;
  j["intersection"] = c.intersection;
  j["union"] = c.union_;
  j["iou"] = c.iou();
  return j;
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

}  // namespace

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["episodes"] = report.episode_count;
  j["miou"] = report.miou;
  j["fb_iou"] = report.fb_iou;
  j["fg_iou"] = report.fg_iou;
  j["bg_iou"] = report.bg_iou;
  auto& classes = j["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : report.classes) {
    nlohmann::ordered_json e;
    e["class_id"] = c.class_id;
    e["intersection"] = c.counts.intersection;
    e["union"] = c.counts.union_;
    e["iou"] = c.iou;
    classes.push_back(std::move(e));
  }
  auto& episodes = j["per_episode"] = nlohmann::ordered_json::array();
  for (const auto& r : report.episodes) {
    nlohmann::ordered_json e;
    e["episode_id"] = r.episode_id;
    e["class_id"] = r.class_id;
    e["foreground"] = counts_json(r.foreground);
    e["background"] = counts_json(r.background);
    episodes.push_back(std::move(e));
  }
  return j;
}

nlohmann::ordered_json to_json(const AblationReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    nlohmann::ordered_json v;
    v["variant"] = e.name;
    v["use_imr"] = e.use_imr;
    v["use_scma_calibration"] = e.use_scma_calibration;
    v["miou"] = e.report.miou;
    v["fb_iou"] = e.report.fb_iou;
    v["delta_miou"] = report.delta_miou(i);
    v["report"] = to_json(e.report);
    j.push_back(std::move(v));
  }
  return j;
}

nlohmann::ordered_json to_json(const std::vector<LayerScoreStats>& stats) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& s : stats) {
    nlohmann::ordered_json v;
    v["layer"] = s.layer;
    v["pairs"] = s.pairs;
    v["mean_pre"] = s.mean_pre;
    v["mean_post"] = s.mean_post;
    v["reduction_percent"] = s.reduction_percent();
    j.push_back(std::move(v));
  }
  return j;
}

std::string format_table(const MetricsReport& report) {
  std::string out;
  out += "class   intersection      union     IoU\n";
  for (const auto& c : report.classes) {
    char line[96];
    std::snprintf(line, sizeof line, "%5d  %13llu  %9llu  %6.4f\n", c.class_id,
                  static_cast<unsigned long long>(c.counts.intersection),
                  static_cast<unsigned long long>(c.counts.union_), c.iou);
    out += line;
  }
  out += "episodes " + std::to_string(report.episode_count) + "\n";
  out += "mIoU   " + fmt("%.4f", report.miou) + "\n";
  out += "FB-IoU " + fmt("%.4f", report.fb_iou) + "  (FG " + fmt("%.4f", report.fg_iou) +
         ", BG " + fmt("%.4f", report.bg_iou) + ")\n";
  return out;
}

std::string format_table(const AblationReport& report) {
  std::string out = "variant         IMR  SCMA    mIoU   FB-IoU   dmIoU\n";
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    char line[128];
    std::snprintf(line, sizeof line, "%-14s  %-3s  %-4s  %6.4f  %6.4f  %+7.4f\n", e.name.c_str(),
                  e.use_imr ? "on" : "off", e.use_scma_calibration ? "on" : "off", e.report.miou,
                  e.report.fb_iou, report.delta_miou(i));
    out += line;
  }
  return out;
}

std::string format_table(const std::vector<LayerScoreStats>& stats) {
  std::string out = "layer      pairs   MA(pre)  SCMA(post)  reduction\n";
  for (const auto& s : stats) {
    char line[128];
    std::snprintf(line, sizeof line, "%5d  %9zu  %8.4f  %10.4f  %8.2f%%\n", s.layer + 1, s.pairs,
                  s.mean_pre, s.mean_post, s.reduction_percent());
    out += line;
  }
  return out;
}

}  // namespace fssam
