#include "mcpilot/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mcpilot {

std::string fmt9(double x) {
  if (x == 0.0) return "0";  // avoids "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_throws_csv(std::ostream& out, const std::vector<ThrowRecord>& records,
                      std::uint64_t seed) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ThrowRecord& r = records[i];
    out << "# throw " << i << "\n";
    out << "# v " << fmt9(r.speed) << "\n";
    out << "# target " << fmt9(r.target.x) << " " << fmt9(r.target.y) << " "
        << fmt9(r.target.z) << "\n";
    out << "# t_command " << fmt9(r.t_command) << "\n";
    out << "# seed " << seed << "\n";
    out << "t,px,py,pz,vx,vy,vz\n";
    for (const auto& s : r.samples) {
      out << fmt9(s.t) << "," << fmt9(s.p.x()) << "," << fmt9(s.p.y()) << "," << fmt9(s.p.z())
          << "," << fmt9(s.v.x()) << "," << fmt9(s.v.y()) << "," << fmt9(s.v.z()) << "\n";
    }
    out << "landing," << fmt9(r.landing.x()) << "," << fmt9(r.landing.y()) << ","
        << fmt9(r.landing.z()) << ",,,\n";
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::vector<ThrowRecord> read_throws_csv(std::istream& in, double hit_radius) {
  std::vector<ThrowRecord> out;
  std::string line;
  int line_no = 0;
  ThrowRecord* cur = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string key;
      meta >> key;
      if (key == "throw") {
        out.emplace_back();
        cur = &out.back();
      } else if (!cur) {
        throw std::runtime_error("throws CSV: metadata before the first throw");
      } else if (key == "v") {
        meta >> cur->speed;
      } else if (key == "target") {
        meta >> cur->target.x >> cur->target.y >> cur->target.z;
      } else if (key == "t_command") {
        meta >> cur->t_command;
      }
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;
    if (!cur) throw std::runtime_error("throws CSV: data before the first throw");
    const auto cells = split_csv(line);
    if (cells.size() != 7) {
      throw std::runtime_error("throws CSV line " + std::to_string(line_no) + ": expected 7 cells");
    }
    if (cells[0] == "landing") {
      cur->landing = Vec3(to_double(cells[1], line_no), to_double(cells[2], line_no),
                          to_double(cells[3], line_no));
      cur->hit = cur->error() <= hit_radius;
      continue;
    }
    TrajectorySample s;
    s.t = to_double(cells[0], line_no);
    for (int k = 0; k < 3; ++k) {
      s.p(k) = to_double(cells[1 + k], line_no);
      s.v(k) = to_double(cells[4 + k], line_no);
    }
    cur->samples.push_back(s);
  }
  for (auto& r : out) {
    if (r.samples.empty()) throw std::runtime_error("throws CSV: throw without samples");
    r.release = {r.samples.front().p, r.samples.front().v};
  }
  return out;
}

void write_results_csv(std::ostream& out, const EvalReport& report) {
  out << "target_x,target_y,landing_x,landing_y,error,hit\n";
  for (const auto& r : report.rows) {
    out << fmt9(r.target.x) << "," << fmt9(r.target.y) << "," << fmt9(r.landing.x()) << ","
        << fmt9(r.landing.y()) << "," << fmt9(r.error) << "," << (r.hit ? 1 : 0) << "\n";
  }
}

void write_opt_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "step,J_hat,grad_norm,dropout_p\n";
  for (const auto& r : trace) {
    out << r.step << "," << fmt9(r.J) << "," << fmt9(r.grad_norm) << "," << fmt9(r.dropout)
        << "\n";
  }
}

void write_bo_trace_csv(std::ostream& out, const std::vector<BOSample>& trace) {
  out << "iter,a,b,F\n";
  for (const auto& r : trace) {
    out << r.iter << "," << fmt9(r.a) << "," << fmt9(r.b) << "," << fmt9(r.F) << "\n";
  }
}

void write_regression_csv(std::ostream& out, const RegressionSet& data) {
  out << "x,y,z,v\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << fmt9(data.inputs[i].x()) << "," << fmt9(data.inputs[i].y()) << ","
        << fmt9(data.inputs[i].z()) << "," << fmt9(data.speeds[i]) << "\n";
  }
}

RegressionSet read_regression_csv(std::istream& in) {
  RegressionSet data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("x,", 0) == 0) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw std::runtime_error("regression CSV: expected 4 cells");
    data.inputs.emplace_back(to_double(cells[0], line_no), to_double(cells[1], line_no),
                             to_double(cells[2], line_no));
    data.speeds.push_back(to_double(cells[3], line_no));
  }
  return data;
}

void write_delay(std::ostream& out, const DelayModel& delay, bool estimated) {
  out << std::setprecision(17);
  out << "mcpilot-delay 1\n";
  out << "a " << delay.a << "\nb " << delay.b << "\nt_command " << delay.t_command << "\n";
  out << "estimated " << (estimated ? 1 : 0) << "\n";
}

DelayModel read_delay(std::istream& in, bool* estimated) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "mcpilot-delay" || version != 1) throw std::runtime_error("delay file: bad header");
  DelayModel d;
  int est = 0;
  std::string k1, k2, k3, k4;
  in >> k1 >> d.a >> k2 >> d.b >> k3 >> d.t_command >> k4 >> est;
  if (!in || k1 != "a" || k2 != "b" || k3 != "t_command" || k4 != "estimated") {
    throw std::runtime_error("delay file: malformed");
  }
  if (estimated) *estimated = est != 0;
  return d;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace mcpilot
