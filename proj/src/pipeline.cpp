#include "uosam/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "uosam/bridge.hpp"
#include "uosam/maskops.hpp"
#include "uosam/png_io.hpp"

namespace uosam::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::Config, "invalid value '" + value + "' for " + key);
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

struct Field {
  const char* key;
  void (*set)(PipelineConfig&, const std::string&, const std::string&);
  json (*get)(const PipelineConfig&);
};

#define UOSAM_FIELD(name, member, parse)                                                               \
  Field {                                                                                              \
    name, [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = parse(k, v); }, \
        [](const PipelineConfig& c) { return json(c.member); }                                         \
  }

std::string parse_string(const std::string&, const std::string& value) { return value; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      UOSAM_FIELD("backend", backend, parse_string),
      UOSAM_FIELD("bridge.inline", bridge_inline, parse_bool),
      UOSAM_FIELD("mock.stride", mock_stride, parse_int),
      UOSAM_FIELD("mock.classes", mock_classes, parse_int),
      UOSAM_FIELD("grid.points_per_side", grid_points_per_side, parse_int),
      Field{"grid.offset",
            [](PipelineConfig& c, const std::string& k, const std::string& v) { c.grid_offset = parse_double(k, v); },
            [](const PipelineConfig& c) { return c.grid_offset ? json(*c.grid_offset) : json(nullptr); }},
      Field{"grid.spacing",
            [](PipelineConfig& c, const std::string& k, const std::string& v) { c.grid_spacing = parse_double(k, v); },
            [](const PipelineConfig& c) { return c.grid_spacing ? json(*c.grid_spacing) : json(nullptr); }},
      UOSAM_FIELD("crops.layers", crop_layers, parse_int),
      UOSAM_FIELD("crops.overlap", crop_overlap, parse_double),
      UOSAM_FIELD("gro.min_score", min_score, parse_double),
      UOSAM_FIELD("gro.nms_iou", nms_iou, parse_double),
      UOSAM_FIELD("gro.enabled", enable_gro, parse_bool),
      UOSAM_FIELD("lro.enabled", enable_lro, parse_bool),
      UOSAM_FIELD("lro.connectivity", connectivity, parse_int),
      UOSAM_FIELD("eval.band_fraction", band_fraction, parse_double),
      UOSAM_FIELD("eval.beta_sq", beta_sq, parse_double),
      UOSAM_FIELD("eval.class_count", class_count, parse_int),
      UOSAM_FIELD("workers", workers, parse_int),
      UOSAM_FIELD("ignore_id", ignore_id, parse_int),
  };
  return table;
}

#undef UOSAM_FIELD

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  if (node.is_null()) return;
  if (node.is_string()) {
    out.emplace_back(prefix, node.get<std::string>());
  } else if (node.is_boolean()) {
    out.emplace_back(prefix, node.get<bool>() ? "true" : "false");
  } else if (node.is_number_integer()) {
    out.emplace_back(prefix, std::to_string(node.get<long long>()));
  } else if (node.is_number()) {
    std::ostringstream s;
    s << std::setprecision(17) << node.get<double>();
    out.emplace_back(prefix, s.str());
  } else {
    fail(ErrorCode::Config, "unsupported value for " + prefix);
  }
}

std::vector<std::string> png_names(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::Config, what);
  };
  check(!backend.empty(), "backend must not be empty");
  if (backend != "mock") {
    try {
      (void)bridge::BridgeAddress::parse(backend);
    } catch (const Error& e) {
      fail(ErrorCode::Config, std::string("backend: ") + e.what());
    }
  }
  check(mock_stride >= 1, "mock.stride must be >= 1");
  check(mock_classes >= 1 && mock_classes <= 254, "mock.classes must lie in [1, 254]");
  check(grid_points_per_side >= 1, "grid.points_per_side must be >= 1");
  check(!grid_spacing || *grid_spacing > 0.0, "grid.spacing must be > 0");
  check(!grid_offset || *grid_offset >= 0.0, "grid.offset must be >= 0");
  check(crop_layers >= 1 && crop_layers <= 12, "crops.layers must lie in [1, 12]");
  check(crop_overlap >= 0.0 && crop_overlap < 1.0, "crops.overlap must lie in [0, 1)");
  check(min_score >= 0.0 && min_score <= 1.0, "gro.min_score must lie in [0, 1]");
  check(nms_iou >= 0.0 && nms_iou <= 1.0, "gro.nms_iou must lie in [0, 1]");
  check(band_fraction > 0.0 && band_fraction <= 1.0, "eval.band_fraction must lie in (0, 1]");
  check(beta_sq > 0.0, "eval.beta_sq must be > 0");
  check(class_count >= 0 && class_count <= 255, "eval.class_count must lie in [0, 255]");
  check(workers >= 1, "workers must be >= 1");
  check(connectivity == 4 || connectivity == 8, "lro.connectivity must be 4 or 8");
  check(ignore_id >= 0 && ignore_id <= 255, "ignore_id must lie in [0, 255]");
}

GridSpec PipelineConfig::grid_for(Extent image) const {
  GridSpec spec = GridSpec::for_side(grid_points_per_side, std::max(image.width, image.height));
  if (grid_offset) spec.offset = *grid_offset;
  if (grid_spacing) spec.spacing = *grid_spacing;
  return spec;
}

lro::LroOptions PipelineConfig::lro_options() const {
  lro::LroOptions o;
  o.connectivity = connectivity == 4 ? maskops::Connectivity::Four : maskops::Connectivity::Eight;
  return o;
}

gro::GroOptions PipelineConfig::gro_options() const {
  gro::GroOptions o;
  o.min_score = min_score;
  o.nms_iou = nms_iou;
  return o;
}

metrics::EvalOptions PipelineConfig::eval_options() const {
  return {class_count, band_fraction, beta_sq};
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, key, value);
      return;
    }
  }
  fail(ErrorCode::Config, "unknown config key '" + key + "'");
}

void apply_config_json(PipelineConfig& config, const json& j) {
  if (!j.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
  std::vector<std::pair<std::string, std::string>> flat;
  flatten(j, "", flat);
  for (const auto& [k, v] : flat) set_config_value(config, k, v);
}

PipelineConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, path.string() + ": " + e.what());
  }
  PipelineConfig config;
  apply_config_json(config, j);
  return config;
}

json config_to_json(const PipelineConfig& config) {
  json out = json::object();
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

void apply_environment(PipelineConfig& config) {
  if (const char* env = std::getenv("UO_SAM_BRIDGE"); env != nullptr && *env != '\0') config.backend = env;
}

BackendPool::BackendPool(const PipelineConfig& config) : config_(config) {
  if (config_.backend == "mock") {
    seg::MockOptions options;
    options.stride = config_.mock_stride;
    options.number_of_classes = config_.mock_classes;
    mock_ = std::make_shared<seg::MockOracleBackend>(options);
  }
}

seg::SegmenterBackend& BackendPool::acquire(int worker) {
  if (mock_) return *mock_;
  std::lock_guard lock(mutex_);
  if (bridges_.size() <= static_cast<std::size_t>(worker)) bridges_.resize(worker + 1);
  auto& slot = bridges_[worker];
  if (!slot) {
    bridge::BridgeOptions options;
    options.inline_features = config_.bridge_inline;
    slot = std::make_unique<bridge::BridgeBackend>(bridge::BridgeAddress::parse(config_.backend).open(), options);
  }
  return *slot;
}

std::vector<DatasetItem> discover_dataset(const fs::path& input_dir) {
  if (!fs::is_directory(input_dir)) fail(ErrorCode::Io, input_dir.string() + " is not a directory");
  std::vector<DatasetItem> items;
  const fs::path manifest = input_dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, manifest.string() + ": " + e.what());
    }
    const json& list = j.is_array() ? j : j.value("items", json::array());
    for (const auto& e : list) {
      if (!e.contains("image") || !e.contains("coarse")) {
        fail(ErrorCode::Config, manifest.string() + ": items need 'image' and 'coarse'");
      }
      DatasetItem item;
      item.image = input_dir / e["image"].get<std::string>();
      item.coarse = input_dir / e["coarse"].get<std::string>();
      if (e.contains("gt") && !e["gt"].is_null()) item.gt = input_dir / e["gt"].get<std::string>();
      item.name = e.value("name", item.image.stem().string());
      items.push_back(std::move(item));
    }
  } else {
    for (const auto& stem : png_names(input_dir)) {
      if (ends_with(stem, "_coarse") || ends_with(stem, "_gt")) continue;
      DatasetItem item{stem, input_dir / (stem + ".png"), input_dir / (stem + "_coarse.png"), std::nullopt};
      if (fs::exists(input_dir / (stem + "_gt.png"))) item.gt = input_dir / (stem + "_gt.png");
      items.push_back(std::move(item));
    }
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].name == items[i - 1].name) fail(ErrorCode::Config, "duplicate item name '" + items[i].name + "'");
  }
  return items;
}

json to_json(const ImageLog& log) {
  json objects = json::array();
  for (const auto& o : log.objects) {
    json e = {{"class_id", o.class_id},
              {"score", o.score},
              {"degraded", o.degraded},
              {"degenerate_points", o.degenerate_points}};
    if (!o.fallback.empty()) e["fallback"] = o.fallback;
    objects.push_back(std::move(e));
  }
  json out = {{"image", log.name}, {"ok", log.ok}, {"objects", objects}, {"gro_proposals", log.gro_proposals}};
  if (!log.ok) out["error"] = log.error;
  return out;
}

LabelMap assemble_lro_map(const LabelMap& coarse, const std::vector<lro::RefinementResult>& results) {
  const ClassId ignore = coarse.ignore_id();
  LabelMap out(coarse.extent(), kBackgroundId, ignore);
  std::vector<double> best(coarse.extent().area(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (coarse[i] == ignore) out.set(i, ignore);
  }
  std::vector<const lro::RefinementResult*> order;
  for (const auto& r : results) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->class_id < b->class_id; });
  for (const auto* r : order) {
    require(r->final.mask.extent() == coarse.extent(), ErrorCode::DimensionMismatch,
            "refined mask does not match the coarse map");
    for (std::size_t i = 0; i < best.size(); ++i) {
      if (!r->final.mask.test(i) || coarse[i] == ignore) continue;
      if (r->final.score > best[i]) {
        best[i] = r->final.score;
        out.set(i, r->class_id);
      }
    }
  }
  return out;
}

LabelMap refine_label_map(seg::SegmenterBackend& backend, const Image& image, const LabelMap& coarse,
                          const PipelineConfig& config, ImageLog* log) {
  require(image.extent() == coarse.extent(), ErrorCode::DimensionMismatch,
          "image and coarse map sizes differ");
  if (!config.enable_lro && !config.enable_gro) return coarse;

  LabelMap lro_map = coarse;
  if (config.enable_lro) {
    const auto objects = split_by_class(coarse);
    if (!objects.empty()) {
      const FeatureMap features = backend.embed(image);
      std::vector<lro::RefinementResult> results;
      for (const auto& [id, mask] : objects) {
        ObjectLog entry;
        entry.class_id = id;
        try {
          results.push_back(lro::refine_object(backend, features, mask, id, config.lro_options()));
          entry.score = results.back().final.score;
          entry.degraded = results.back().degraded;
          entry.degenerate_points = results.back().degenerate_points;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoObject && e.code() != ErrorCode::EmptyProposal &&
              e.code() != ErrorCode::EmptyForeground) {
            throw;
          }
          lro::RefinementResult fallback;
          fallback.class_id = id;
          fallback.final = {mask, 0.0};
          fallback.first_step = fallback.final;
          fallback.degraded = true;
          results.push_back(std::move(fallback));
          entry.degraded = true;
          entry.fallback = to_string(e.code());
        }
        if (log) log->objects.push_back(entry);
      }
      lro_map = assemble_lro_map(coarse, results);
    }
  }

  if (config.enable_gro) {
    const auto crops = gro::generate_crop_boxes(image.width(), image.height(), config.crop_layers, config.crop_overlap);
    const auto global =
        gro::image_wide_segment(backend, image, config.grid_for(image.extent()), crops, config.gro_options());
    if (log) log->gro_proposals = global.proposals.size();
    lro_map = gro::category_vote_fuse(global, lro_map);
  }
  return lro_map;
}

RunSummary run_refine(const PipelineConfig& config, const fs::path& input_dir, const fs::path& output_dir) {
  config.validate();
  const auto items = discover_dataset(input_dir);
  fs::create_directories(output_dir);

  BackendPool pool(config);
  std::vector<ImageLog> logs(items.size());
  std::atomic<std::size_t> next{0};
  const auto ignore = static_cast<ClassId>(config.ignore_id);

  auto worker = [&](int w) {
    seg::SegmenterBackend* backend = nullptr;
    for (std::size_t i = next++; i < items.size(); i = next++) {
      ImageLog& log = logs[i];
      log.name = items[i].name;
      try {
        if (!backend) backend = &pool.acquire(w);
        const LabelMap coarse = png_io::read_label_map(items[i].coarse, ignore);
        LabelMap refined;
        if (!config.enable_lro && !config.enable_gro) {
          // Identity pipeline: reproduce the input bytes exactly.
          fs::copy_file(items[i].coarse, output_dir / (items[i].name + ".png"),
                        fs::copy_options::overwrite_existing);
          continue;
        }
        const Image image = png_io::read_image(items[i].image);
        refined = refine_label_map(*backend, image, coarse, config, &log);
        png_io::write_label_map(output_dir / (items[i].name + ".png"), refined);
      } catch (const std::exception& e) {
        log.ok = false;
        log.error = e.what();
        log.objects.clear();
      }
    }
  };

  const int threads = std::max(1, std::min<int>(config.workers, static_cast<int>(items.size())));
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool_threads;
    for (int w = 0; w < threads; ++w) pool_threads.emplace_back(worker, w);
    for (auto& t : pool_threads) t.join();
  }

  RunSummary summary;
  std::ofstream run_log(output_dir / "run_log.jsonl");
  for (auto& log : logs) {
    run_log << to_json(log).dump() << '\n';
    ++summary.processed;
    if (!log.ok) ++summary.failed;
  }
  summary.logs = std::move(logs);
  return summary;
}

namespace {

std::vector<LabelMap> read_maps(const fs::path& dir, const std::vector<std::string>& names, ClassId ignore) {
  std::vector<LabelMap> maps;
  maps.reserve(names.size());
  for (const auto& n : names) maps.push_back(png_io::read_label_map(dir / (n + ".png"), ignore));
  return maps;
}

void check_same_names(const std::vector<std::string>& a, const fs::path& a_dir, const std::vector<std::string>& b,
                      const fs::path& b_dir) {
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
  if (!only_a.empty()) {
    fail(ErrorCode::UnpairedFiles, only_a.front() + ".png in " + a_dir.string() + " has no match in " + b_dir.string());
  }
  if (!only_b.empty()) {
    fail(ErrorCode::UnpairedFiles, only_b.front() + ".png in " + b_dir.string() + " has no match in " + a_dir.string());
  }
}

int auto_class_count(const std::vector<const std::vector<LabelMap>*>& sets) {
  int max_id = 0;
  for (const auto* maps : sets) {
    for (const auto& m : *maps) {
      for (ClassId id : m.labels()) {
        if (id != m.ignore_id()) max_id = std::max<int>(max_id, id);
      }
    }
  }
  return max_id + 1;
}

json optional_metric(const std::function<double()>& compute) {
  try {
    return compute();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoScoredClasses || e.code() == ErrorCode::NoScoredPixels) return nullptr;
    throw;
  }
}

}  // namespace

json eval_report_json(const metrics::EvalReport& report, const PipelineConfig& config, std::size_t images,
                      int class_count) {
  auto options = config.eval_options();
  options.class_count = class_count;
  json out = {{"assumptions", metrics::assumptions_json(options)},
              {"images", images},
              {"class_count", class_count},
              {"ignore_id", config.ignore_id},
              {"metrics", metrics::to_json(report)}};
  return out;
}

metrics::EvalReport run_eval(const fs::path& pred_dir, const fs::path& gt_dir, const PipelineConfig& config,
                             const std::optional<fs::path>& baseline_dir, const EvalOutputs& outputs) {
  config.validate();
  const auto ignore = static_cast<ClassId>(config.ignore_id);
  const auto gt_names = png_names(gt_dir);
  const auto pred_names = png_names(pred_dir);
  check_same_names(pred_names, pred_dir, gt_names, gt_dir);
  const auto gts = read_maps(gt_dir, gt_names, ignore);
  const auto preds = read_maps(pred_dir, pred_names, ignore);

  std::vector<LabelMap> baseline;
  if (baseline_dir) {
    const auto names = png_names(*baseline_dir);
    check_same_names(names, *baseline_dir, gt_names, gt_dir);
    baseline = read_maps(*baseline_dir, names, ignore);
  }

  auto options = config.eval_options();
  if (options.class_count <= 0) options.class_count = auto_class_count({&gts, &preds, &baseline});
  for (const auto* maps : std::array<const std::vector<LabelMap>*, 3>{&gts, &preds, &baseline}) {
    for (const auto& m : *maps) m.validate(options.class_count);
  }

  auto report = metrics::evaluate(preds, gts, options);
  if (baseline_dir) {
    const auto base = metrics::evaluate(baseline, gts, options);
    report.deltas = metrics::report_delta(base, report, baseline_dir->filename().string());
  }

  if (outputs.report_json) {
    std::ofstream out(*outputs.report_json);
    if (!out) fail(ErrorCode::Io, "cannot write " + outputs.report_json->string());
    out << eval_report_json(report, config, gts.size(), options.class_count).dump(2) << '\n';
  }
  if (outputs.per_image_jsonl) {
    std::ofstream out(*outputs.per_image_jsonl);
    if (!out) fail(ErrorCode::Io, "cannot write " + outputs.per_image_jsonl->string());
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const auto cm = metrics::confusion(preds[i], gts[i], options.class_count);
      json line = {
          {"image", gt_names[i]},
          {"miou", optional_metric([&] { return metrics::miou(cm).miou; })},
          {"b_miou", optional_metric([&] {
             return metrics::boundary_miou({preds[i]}, {gts[i]}, options.class_count, options.band_fraction);
           })},
          {"pixel_acc", optional_metric([&] { return metrics::pixel_accuracy(cm); })},
          {"img_acc", metrics::image_correct(preds[i], gts[i]) ? 1.0 : 0.0},
          {"f_beta", metrics::f_beta(metrics::foreground_counts(preds[i], gts[i]), options.beta_sq)}};
      out << line.dump() << '\n';
    }
    json aggregate = metrics::to_json(report);
    aggregate["aggregate"] = true;
    aggregate["images"] = gts.size();
    out << aggregate.dump() << '\n';
  }
  return report;
}

std::string format_comparison(const metrics::EvalReport& baseline, const metrics::EvalReport& refined) {
  const auto d = metrics::report_delta(baseline, refined);
  std::ostringstream out;
  auto line = [&](const char* name, double b, double r, double delta) {
    out << std::left << std::setw(10) << name << std::right << std::setw(6) << percent(b) << " -> " << std::setw(5)
        << percent(r) << " (" << metrics::format_delta(delta) << ")\n";
  };
  line("mIoU", baseline.miou, refined.miou, d.miou);
  line("b-mIoU", baseline.b_miou, refined.b_miou, d.b_miou);
  line("pAcc", baseline.pixel_acc, refined.pixel_acc, d.pixel_acc);
  line("Img-Acc", baseline.img_acc, refined.img_acc, d.img_acc);
  line("F_beta", baseline.f_beta, refined.f_beta, d.f_beta);
  return out.str();
}

metrics::CategoryHistogram run_stats(const fs::path& gt_dir, const PipelineConfig& config, std::ostream& err) {
  const auto names = png_names(gt_dir);
  if (names.empty()) {
    err << "warning: no label maps found in " << gt_dir.string() << '\n';
    return {};
  }
  return metrics::category_stats(read_maps(gt_dir, names, static_cast<ClassId>(config.ignore_id)));
}

std::string format_histogram(const std::string& row_name, const metrics::CategoryHistogram& h) {
  std::ostringstream out;
  const int name_width = static_cast<int>(std::max<std::size_t>(row_name.size(), 24)) + 2;
  out << std::left << std::setw(name_width) << "Categories in each image" << std::right;
  for (const char* label : {"1", "2", "3", "4", "5", ">5"}) out << std::setw(8) << label;
  out << '\n' << std::left << std::setw(name_width) << row_name << std::right;
  for (auto n : h.buckets) out << std::setw(8) << n;
  out << '\n';
  if (h.zero_count > 0) out << "images without categories: " << h.zero_count << '\n';
  return out.str();
}

std::vector<synth::SceneSpec> synth_specs(const SynthOptions& options) {
  require(options.min_objects >= 1 && options.min_objects <= options.max_objects, ErrorCode::InvalidArgument,
          "object count range is invalid");
  synth::SplitMix64 seeds(options.seed);
  synth::SplitMix64 counts(options.seed ^ 1ULL);
  std::vector<synth::SceneSpec> specs;
  for (std::size_t i = 0; i < options.count; ++i) {
    synth::SceneSpec spec;
    spec.seed = seeds.next();
    spec.object_count = counts.uniform_int(options.min_objects, options.max_objects);
    spec.width = options.width;
    spec.height = options.height;
    spec.shapes = options.shapes;
    spec.corruption = options.corruption;
    specs.push_back(std::move(spec));
  }
  return specs;
}

void run_synth(const SynthOptions& options, const fs::path& output_dir) {
  const auto specs = synth_specs(options);
  for (const char* sub : {"images", "coarse", "gt"}) fs::create_directories(output_dir / sub);

  json shapes = json::array();
  for (auto s : options.shapes) shapes.push_back(synth::to_string(s));
  json items = json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu", i);
    const auto scene = synth::generate_scene(specs[i]);
    const std::string file = std::string(name) + ".png";
    png_io::write_image(output_dir / "images" / file, scene.image);
    png_io::write_label_map(output_dir / "coarse" / file, scene.coarse);
    png_io::write_label_map(output_dir / "gt" / file, scene.ground_truth);
    json kinds = json::array();
    for (auto k : scene.kinds) kinds.push_back(synth::to_string(k));
    items.push_back({{"name", name},
                     {"image", "images/" + file},
                     {"coarse", "coarse/" + file},
                     {"gt", "gt/" + file},
                     {"seed", specs[i].seed},
                     {"object_count", specs[i].object_count},
                     {"shapes", kinds}});
  }
  const auto& c = options.corruption;
  json manifest = {{"generator",
                    {{"seed", options.seed},
                     {"count", options.count},
                     {"width", options.width},
                     {"height", options.height},
                     {"min_objects", options.min_objects},
                     {"max_objects", options.max_objects},
                     {"shapes", shapes},
                     {"corruption",
                      {{"dilate_px", c.dilate_px},
                       {"erode_px", c.erode_px},
                       {"boundary_noise_prob", c.boundary_noise_prob},
                       {"drop_fragment_prob", c.drop_fragment_prob}}}}},
                   {"items", items}};
  std::ofstream out(output_dir / "manifest.json");
  if (!out) fail(ErrorCode::Io, "cannot write manifest in " + output_dir.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace uosam::cli
