#include "run_config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "wsail/types.hpp"

namespace wsail::cli {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::CorruptHeader, "invalid boolean for key '" + key + "': " + v);
}

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, "cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(ErrorCode::CorruptHeader,
             path + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::CorruptHeader,
           path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    try {
      if (full == "synth.classes") cfg.synth_classes = std::stoi(value);
      else if (full == "synth.train") cfg.synth_train = std::stoi(value);
      else if (full == "synth.test") cfg.synth_test = std::stoi(value);
      else if (full == "synth.scenes") cfg.synth_scenes = std::stoi(value);
      else if (full == "synth.clip_seconds") cfg.synth_clip_seconds = std::stod(value);
      else if (full == "synth.seed") cfg.synth_seed = std::stoull(value);
      else if (full == "synth.visual") cfg.synth_visual = parse_bool(value, full);
      else if (full == "synth.visual_dim") cfg.synth_visual_dim = std::stoi(value);
      else if (full == "nmf.k") cfg.nmf_k = std::stoi(value);
      else if (full == "nmf.iterations") cfg.nmf_iterations = std::stoi(value);
      else if (full == "nmf.seed") cfg.nmf_seed = std::stoull(value);
      else if (full == "model.learning_rate") cfg.learning_rate = std::stod(value);
      else if (full == "model.epochs") cfg.epochs = std::stoi(value);
      else if (full == "model.seed") cfg.model_seed = std::stoull(value);
      else if (full == "model.use_visual") cfg.use_visual = parse_bool(value, full);
      else if (full == "proposals.tsp") cfg.tsp = parse_bool(value, full);
      else if (full == "proposals.ncp") cfg.ncp = parse_bool(value, full);
      else if (full == "enhance.tau") {
        if (value == "none" || value.empty()) cfg.tau.reset();
        else cfg.tau = std::stod(value);
      } else if (full == "enhance.mode") {
        if (value != "label-known" && value != "label-unknown") {
          fail(ErrorCode::CorruptHeader, "invalid enhance.mode: " + value);
        }
        cfg.enhance_mode = value;
      } else if (full == "enhance.class") cfg.enhance_class = std::stoi(value);
      else if (full == "eval.snr_levels") cfg.snr_levels = parse_double_list(value);
      else if (full == "eval.seed") cfg.eval_seed = std::stoull(value);
      else if (full == "run.jobs") cfg.jobs = std::stoi(value);
      else {
        fail(ErrorCode::CorruptHeader,
             path + ":" + std::to_string(line_no) + ": unknown key '" + full + "'");
      }
    } catch (const std::invalid_argument&) {
      fail(ErrorCode::CorruptHeader,
           path + ":" + std::to_string(line_no) + ": invalid value for '" + full + "'");
    } catch (const std::out_of_range&) {
      fail(ErrorCode::CorruptHeader,
           path + ":" + std::to_string(line_no) + ": value out of range for '" + full + "'");
    }
  }
  return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write config snapshot: " + path);
  out << "[synth]\n"
      << "classes = " << cfg.synth_classes << "\n"
      << "train = " << cfg.synth_train << "\n"
      << "test = " << cfg.synth_test << "\n"
      << "scenes = " << cfg.synth_scenes << "\n"
      << "clip_seconds = " << cfg.synth_clip_seconds << "\n"
      << "seed = " << cfg.synth_seed << "\n"
      << "visual = " << (cfg.synth_visual ? "true" : "false") << "\n"
      << "visual_dim = " << cfg.synth_visual_dim << "\n\n";
  out << "[nmf]\n"
      << "k = " << cfg.nmf_k << "\n"
      << "iterations = " << cfg.nmf_iterations << "\n"
      << "seed = " << cfg.nmf_seed << "\n\n";
  out << "[model]\n"
      << "learning_rate = " << cfg.learning_rate << "\n"
      << "epochs = " << cfg.epochs << "\n"
      << "seed = " << cfg.model_seed << "\n"
      << "use_visual = " << (cfg.use_visual ? "true" : "false") << "\n\n";
  out << "[proposals]\n"
      << "tsp = " << (cfg.tsp ? "true" : "false") << "\n"
      << "ncp = " << (cfg.ncp ? "true" : "false") << "\n\n";
  out << "[enhance]\n"
      << "tau = ";
  if (cfg.tau.has_value()) out << *cfg.tau;
  else out << "none";
  out << "\n"
      << "mode = " << cfg.enhance_mode << "\n"
      << "class = " << cfg.enhance_class << "\n\n";
  out << "[eval]\n"
      << "snr_levels = ";
  for (std::size_t i = 0; i < cfg.snr_levels.size(); ++i) {
    if (i) out << ",";
    out << cfg.snr_levels[i];
  }
  out << "\n"
      << "seed = " << cfg.eval_seed << "\n\n";
  out << "[run]\n"
      << "jobs = " << cfg.jobs << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed: " + path);
}

}  // namespace wsail::cli
