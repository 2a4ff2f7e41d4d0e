#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "obr/qsinr.hpp"
#include "obr/radar_model.hpp"

namespace obr {

// Scene files are plain key-value text with a versioned first line:
//
//   # obradar scene v1
//   [geometry]
//   nt = 8
//   nr = 5
//   wavelength = 1.0
//   spacing = half              # or tx_positions = 0,0.5,... / rx_positions = ...
//   [target]
//   angle_deg = 22
//   kind = nft                  # nft | rft
//   power_db = 20               # |alpha0|^2 (nft) or sigma0^2 (rft)
//   phase_deg = 0               # optional, nft only
//   [noise]
//   power_db = 0
//   [code]
//   length = 100
//   [interference]              # zero or more sections, one per source
//   angle_deg = -50             # or normalized_angle = -0.766
//   delta = 0.1
//   power_db = 30
//
// Powers are given in dB and converted on load. Angles are degrees in files
// and radians in memory.

namespace scene_detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& s) {
  std::size_t pos = s.find('#');
  return pos == std::string::npos ? s : s.substr(0, pos);
}

struct Section {
  std::string name;
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  const std::string& get(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error("scene file: missing key '" + key + "' in [" + name + "]");
    return it->second;
  }

  double get_double(const std::string& key) const {
    const std::string& v = get(key);
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (trim(v.substr(used)) != "")
      throw std::runtime_error("scene file: bad number for '" + key + "'");
    return x;
  }

  int get_int(const std::string& key) const {
    double x = get_double(key);
    int i = static_cast<int>(std::lround(x));
    if (std::abs(x - i) > 1e-9)
      throw std::runtime_error("scene file: '" + key + "' must be an integer");
    return i;
  }
};

inline std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

inline std::vector<Section> parse_sections(std::istream& in, const std::string& magic) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != magic)
    throw std::runtime_error("scene file: first line must be '" + magic + "'");
  std::vector<Section> sections;
  while (std::getline(in, line)) {
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("scene file: malformed section");
      sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || sections.empty())
      throw std::runtime_error("scene file: expected 'key = value' inside a section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    sections.back().kv[key] = value;
  }
  return sections;
}

}  // namespace scene_detail

inline RadarScene parse_scene(std::istream& in) {
  using scene_detail::Section;
  auto sections = scene_detail::parse_sections(in, "# obradar scene v1");

  const Section* geometry = nullptr;
  const Section* target = nullptr;
  const Section* noise = nullptr;
  const Section* code = nullptr;
  std::vector<const Section*> interference;
  for (const auto& s : sections) {
    if (s.name == "geometry") geometry = &s;
    else if (s.name == "target") target = &s;
    else if (s.name == "noise") noise = &s;
    else if (s.name == "code") code = &s;
    else if (s.name == "interference") interference.push_back(&s);
    else throw std::runtime_error("scene file: unknown section [" + s.name + "]");
  }
  if (!geometry || !target || !noise || !code)
    throw std::runtime_error("scene file: sections geometry/target/noise/code are required");

  RadarScene scene;
  double wavelength = geometry->has("wavelength") ? geometry->get_double("wavelength") : 1.0;
  if (geometry->has("tx_positions") || geometry->has("rx_positions")) {
    auto tx = scene_detail::parse_list(geometry->get("tx_positions"));
    auto rx = scene_detail::parse_list(geometry->get("rx_positions"));
    scene.geometry.wavelength = wavelength;
    scene.geometry.tx_positions =
        Eigen::Map<const Eigen::VectorXd>(tx.data(), static_cast<Eigen::Index>(tx.size()));
    scene.geometry.rx_positions =
        Eigen::Map<const Eigen::VectorXd>(rx.data(), static_cast<Eigen::Index>(rx.size()));
  } else {
    std::string spacing = geometry->has("spacing") ? geometry->get("spacing") : "half";
    if (spacing != "half")
      throw std::runtime_error("scene file: spacing must be 'half' or give positions");
    scene.geometry = ArrayGeometry::uniform_linear(geometry->get_int("nt"),
                                                   geometry->get_int("nr"), wavelength);
  }

  double angle = target->get_double("angle_deg") * kPi / 180.0;
  double power = linear_from_db(target->get_double("power_db"));
  std::string kind = target->get("kind");
  if (kind == "nft") {
    double phase = target->has("phase_deg") ? target->get_double("phase_deg") * kPi / 180.0 : 0.0;
    scene.target = TargetModel::nonfluctuating(angle, std::polar(std::sqrt(power), phase));
  } else if (kind == "rft") {
    scene.target = TargetModel::rayleigh(angle, power);
  } else {
    throw std::runtime_error("scene file: target kind must be nft or rft");
  }

  scene.noise_power = linear_from_db(noise->get_double("power_db"));
  scene.code_length = code->get_int("length");

  for (const Section* s : interference) {
    InterferenceSource src;
    if (s->has("normalized_angle"))
      src.mean_normalized_angle = s->get_double("normalized_angle");
    else
      src.mean_normalized_angle = std::sin(s->get_double("angle_deg") * kPi / 180.0);
    src.uncertainty = s->has("delta") ? s->get_double("delta") : 0.0;
    src.power = linear_from_db(s->get_double("power_db"));
    scene.interferences.push_back(src);
  }

  scene.validate();
  return scene;
}

inline RadarScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  return parse_scene(in);
}

// Waveform artifacts store one quadrant symbol per entry (0:+/+ 1:-/+ 2:-/-
// 3:+/-), which keeps the alphabet constraint exact across round trips.
inline void save_waveform(std::ostream& out, const Waveform& w, int nt) {
  if (!w.is_one_bit()) throw std::runtime_error("save_waveform: waveform is not one-bit");
  out << "# obradar waveform v1\n";
  out << "nt = " << nt << "\n";
  out << "length = " << w.size() / nt << "\n";
  out << "symbols = ";
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const auto& z = w.vector()(i);
    int sym = z.real() > 0.0 ? (z.imag() > 0.0 ? 0 : 3) : (z.imag() > 0.0 ? 1 : 2);
    out << sym;
  }
  out << "\n";
}

inline void save_waveform(const std::string& path, const Waveform& w, int nt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write waveform file: " + path);
  save_waveform(out, w, nt);
}

struct WaveformArtifact {
  Waveform waveform;
  int nt = 0;
  int length = 0;
};

inline WaveformArtifact load_waveform(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open waveform file: " + path);
  std::string line;
  if (!std::getline(in, line) || scene_detail::trim(line) != "# obradar waveform v1")
    throw std::runtime_error("waveform file: bad header");
  int nt = -1, length = -1;
  std::string symbols;
  while (std::getline(in, line)) {
    line = scene_detail::trim(scene_detail::strip_comment(line));
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("waveform file: malformed line");
    std::string key = scene_detail::trim(line.substr(0, eq));
    std::string value = scene_detail::trim(line.substr(eq + 1));
    if (key == "nt") nt = std::stoi(value);
    else if (key == "length") length = std::stoi(value);
    else if (key == "symbols") symbols = value;
    else throw std::runtime_error("waveform file: unknown key '" + key + "'");
  }
  if (nt < 1 || length < 1 || symbols.size() != static_cast<std::size_t>(nt) * length)
    throw std::runtime_error("waveform file: inconsistent dimensions");
  Eigen::VectorXcd signs(static_cast<Eigen::Index>(nt) * length);
  for (Eigen::Index i = 0; i < signs.size(); ++i) {
    switch (symbols[static_cast<std::size_t>(i)]) {
      case '0': signs(i) = {1.0, 1.0}; break;
      case '1': signs(i) = {-1.0, 1.0}; break;
      case '2': signs(i) = {-1.0, -1.0}; break;
      case '3': signs(i) = {1.0, -1.0}; break;
      default: throw std::runtime_error("waveform file: bad symbol");
    }
  }
  return {Waveform::one_bit_from_signs(signs), nt, length};
}

inline void save_filter(const std::string& path, const Filter& f, int nr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write filter file: " + path);
  out << "# obradar filter v1\n";
  out << "nr = " << nr << "\n";
  out << "length = " << f.w.size() / nr << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < f.w.size(); ++i)
    out << f.w(i).real() << " " << f.w(i).imag() << "\n";
}

inline Filter load_filter(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open filter file: " + path);
  std::string line;
  if (!std::getline(in, line) || scene_detail::trim(line) != "# obradar filter v1")
    throw std::runtime_error("filter file: bad header");
  int nr = -1, length = -1;
  std::vector<std::complex<double>> values;
  while (std::getline(in, line)) {
    line = scene_detail::trim(scene_detail::strip_comment(line));
    if (line.empty()) continue;
    if (line.find('=') != std::string::npos) {
      std::size_t eq = line.find('=');
      std::string key = scene_detail::trim(line.substr(0, eq));
      std::string value = scene_detail::trim(line.substr(eq + 1));
      if (key == "nr") nr = std::stoi(value);
      else if (key == "length") length = std::stoi(value);
      else throw std::runtime_error("filter file: unknown key '" + key + "'");
      continue;
    }
    std::stringstream ss(line);
    double re = 0.0, im = 0.0;
    ss >> re >> im;
    if (ss.fail()) throw std::runtime_error("filter file: malformed entry");
    values.emplace_back(re, im);
  }
  if (nr < 1 || length < 1 || values.size() != static_cast<std::size_t>(nr) * length)
    throw std::runtime_error("filter file: inconsistent dimensions");
  Filter f;
  f.w = Eigen::Map<const Eigen::VectorXcd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
  f.validate();
  return f;
}

}  // namespace obr
