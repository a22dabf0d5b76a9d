#include "gslift/config.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace gslift {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    int64_t out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::bad_value, key + " expects an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::bad_value, key + " expects a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::bad_value, key + " expects a boolean, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

void add_stage_keys(std::map<std::string, Setter>& t, const std::string& section,
                    StageConfig RunConfig::*stage) {
  auto i = [stage](int StageConfig::*f) {
    return [stage, f](RunConfig& c, const std::string& k, const std::string& v) {
      c.*stage.*f = static_cast<int>(parse_int(k, v));
    };
  };
  auto d = [stage](double StageConfig::*f) {
    return [stage, f](RunConfig& c, const std::string& k, const std::string& v) {
      c.*stage.*f = parse_double(k, v);
    };
  };
  t[section + ".iters"] = i(&StageConfig::iters);
  t[section + ".batch_views"] = i(&StageConfig::batch_views);
  t[section + ".lr_position"] = d(&StageConfig::lr_position);
  t[section + ".lr_color"] = d(&StageConfig::lr_color);
  t[section + ".lr_opacity"] = d(&StageConfig::lr_opacity);
  t[section + ".lr_scale"] = d(&StageConfig::lr_scale);
  t[section + ".lr_rotation"] = d(&StageConfig::lr_rotation);
  t[section + ".lr_floor"] = d(&StageConfig::lr_floor);
  t[section + ".clip_norm"] = d(&StageConfig::clip_norm);
  t[section + ".adam"] = [stage](RunConfig& c, const std::string& k, const std::string& v) {
    (c.*stage).adam = parse_bool(k, v);
  };
  t[section + ".densify_interval"] = i(&StageConfig::densify_interval);
  t[section + ".densify_grad_threshold"] = d(&StageConfig::densify_grad_threshold);
  t[section + ".prune_opacity_threshold"] = d(&StageConfig::prune_opacity_threshold);
  t[section + ".gamma_start"] = d(&StageConfig::gamma_start);
  t[section + ".gamma_increment"] = d(&StageConfig::gamma_increment);
  t[section + ".gamma_period"] = i(&StageConfig::gamma_period);
  t[section + ".beta"] = d(&StageConfig::beta);
  t[section + ".ref_view_weight"] = d(&StageConfig::ref_view_weight);
  t[section + ".checkpoint_interval"] = i(&StageConfig::checkpoint_interval);
  t[section + ".elevation_max"] = d(&StageConfig::elevation_max);
}

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = static_cast<uint64_t>(parse_int(k, v));
    };
    t["io.out_dir"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.io.out_dir = v;
    };
    t["io.width"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.io.width = static_cast<int>(parse_int(k, v));
    };
    t["io.height"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.io.height = static_cast<int>(parse_int(k, v));
    };
    t["scene.style"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.scene.style = style_from_string(v);
    };
    t["scene.strands"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scene.strands = static_cast<int>(parse_int(k, v));
    };
    t["scene.gaussians_per_strand"] = [](RunConfig& c, const std::string& k,
                                         const std::string& v) {
      c.scene.gaussians_per_strand = static_cast<int>(parse_int(k, v));
    };
    t["scene.views"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scene.views = static_cast<int>(parse_int(k, v));
    };
    t["scene.random_views"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scene.random_views = parse_bool(k, v);
    };
    t["scene.ring_elevation"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scene.ring_elevation = parse_double(k, v);
    };
    t["prior.blur_sigma"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.prior.blur_sigma = parse_double(k, v);
    };
    t["prior.jitter_sigma"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.prior.jitter_sigma = parse_double(k, v);
    };
    t["prior.enhancer"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v != "ideal" && v != "blind")
        throw Error(ErrorCode::bad_value, k + " expects ideal or blind, got '" + v + "'");
      c.prior.enhancer = v;
    };
    t["prior.enhancer_strength"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.prior.enhancer_strength = parse_double(k, v);
    };
    t["prior.enhancer_sigma"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.prior.enhancer_sigma = parse_double(k, v);
    };
    t["init.count"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.init.count = static_cast<int>(parse_int(k, v));
    };
    t["init.box_half_extent"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.init.box_half_extent = parse_double(k, v);
    };
    add_stage_keys(t, "coarse", &RunConfig::coarse);
    add_stage_keys(t, "viewwise", &RunConfig::viewwise);
    add_stage_keys(t, "pixelwise", &RunConfig::pixelwise);
    return t;
  }();
  return table;
}

void apply_kv(RunConfig& cfg, const std::string& section, const std::string& key,
              const std::string& value) {
  std::string full = section.empty() ? key : section + "." + key;
  auto it = key_table().find(full);
  if (it == key_table().end()) throw Error(ErrorCode::unknown_key, full);
  it->second(cfg, full, value);
}

}  // namespace

void RunConfig::validate() const {
  if (io.width < 8 || io.height < 8) throw Error(ErrorCode::bad_value, "io resolution too small");
  if (scene.strands < 1) throw Error(ErrorCode::bad_value, "scene.strands must be >= 1");
  if (scene.gaussians_per_strand < 1)
    throw Error(ErrorCode::bad_value, "scene.gaussians_per_strand must be >= 1");
  if (scene.views < 1) throw Error(ErrorCode::bad_value, "scene.views must be >= 1");
  if (init.count < 1) throw Error(ErrorCode::bad_value, "init.count must be >= 1");
  if (!(init.box_half_extent > 0))
    throw Error(ErrorCode::bad_value, "init.box_half_extent must be > 0");
  if (!(prior.blur_sigma >= 0)) throw Error(ErrorCode::bad_value, "prior.blur_sigma");
  if (!(prior.jitter_sigma >= 0)) throw Error(ErrorCode::bad_value, "prior.jitter_sigma");
  coarse.validate();
  viewwise.validate();
  pixelwise.validate();
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.coarse.iters = 1000;
  cfg.coarse.densify_interval = 100;
  cfg.coarse.densify_grad_threshold = 0.01;
  cfg.viewwise.iters = 600;
  cfg.viewwise.densify_interval = 200;
  cfg.viewwise.densify_grad_threshold = 0.0002;
  cfg.pixelwise.iters = 1000;
  cfg.pixelwise.densify_interval = 200;
  cfg.pixelwise.densify_grad_threshold = 0.0002;
  return cfg;
}

void parse_config_text(const std::string& text, RunConfig& cfg) {
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorCode::bad_value,
                    "line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::bad_value,
                  "line " + std::to_string(line_no) + ": expected key=value");
    apply_kv(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_override(const std::string& assignment, RunConfig& cfg) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorCode::bad_value, "override '" + assignment + "' is not key=value");
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  auto it = key_table().find(key);
  if (it == key_table().end()) throw Error(ErrorCode::unknown_key, key);
  it->second(cfg, key, value);
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg = default_run_config();
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::file_missing, path);
    std::ostringstream buf;
    buf << in.rdbuf();
    parse_config_text(buf.str(), cfg);
  }
  for (const std::string& o : overrides) apply_override(o, cfg);
  cfg.validate();
  return cfg;
}

}  // namespace gslift
