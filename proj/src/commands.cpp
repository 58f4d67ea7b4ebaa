#include "dtfusion/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dtfusion/detect_io.hpp"
#include "dtfusion/metrics.hpp"
#include "dtfusion/pipeline.hpp"
#include "dtfusion/run_format.hpp"
#include "dtfusion/safety.hpp"

namespace dtfusion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs `body`, translating library exceptions into exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fusion::UnknownTarget& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const metrics::NoEvent& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_json(const metrics::SafetySummary& s) {
  return {{"speed_variance", s.speed_variance}, {"avg_ttc", optional_number(s.avg_ttc)}, {"min_ttc", optional_number(s.min_ttc)}};
}

}  // namespace

std::vector<double> parse_tau_spec(const std::string& spec) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = spec.find(':', start);
    const std::string tok = spec.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ConfigError("taus", "expected start:stop:step, got '" + spec + "'");
    }
    parts.push_back(v);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw ConfigError("taus", "expected start:stop:step, got '" + spec + "'");
  auto grid = metrics::tau_grid(parts[0], parts[1], parts[2]);
  for (double t : grid) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("taus", "every tau must lie in (0, 1]");
  }
  return grid;
}

int cmd_gen(const GenOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = run::load_scenario_config(opts.config);
    const std::size_t frames = run::write_run_directory(cfg, opts.out);
    err << "wrote " << frames << " frames to " << opts.out.string() << '\n';
    return kExitOk;
  });
}

int cmd_run(const RunOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    const fusion::Mode mode = fusion::mode_from_string(opts.mode);
    const fusion::DepthParams params{opts.th, opts.n, opts.seed};
    params.validate();

    std::optional<detect_io::DetectionMap> external;
    if (opts.detections) external = detect_io::load_detections(*opts.detections);

    const std::size_t count = run::count_frames(opts.frames);
    if (count == 0) throw IoError(run::frame_json_path(opts.frames, 0).string(), "run directory has no frames");

    std::vector<run::ResultRow> rows;
    rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      // Baseline mode never opens the depth rasters.
      Frame frame = run::load_frame(opts.frames, static_cast<std::int64_t>(i), mode == fusion::Mode::fused);
      if (external) {
        const auto it = external->find(frame.index);
        frame.detections = it == external->end() ? std::vector<BoundingBox>{} : it->second;
      }
      if (frame.find_twin(opts.target) == nullptr) throw fusion::UnknownTarget(opts.target);
      rows.push_back(evaluate_frame(frame, opts.target, mode, params, opts.classes));
    }

    std::ostringstream csv;
    run::write_results_csv(rows, csv);
    write_file(opts.out, csv.str());
    return kExitOk;
  });
}

int cmd_eval(const EvalOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.results.empty()) throw ConfigError("--results", "need at least one results file");
    const auto taus = parse_tau_spec(opts.taus);

    std::vector<std::string> names;
    std::vector<std::vector<metrics::CurvePoint>> curves;
    for (const auto& path : opts.results) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw IoError(path.string(), "cannot open results file");
      if (in.peek() == std::char_traits<char>::eof()) throw ConfigError("--results", path.string() + " is empty");
      const auto rows = run::read_results_csv(in, path.string());
      const auto records = run::to_eval_records(rows);
      if (records.empty()) throw ConfigError("--results", path.string() + " holds no scorable rows");

      std::string name = "accuracy_" + std::string(fusion::to_string(rows.front().mode));
      int dup = 1;
      std::string unique = name;
      while (std::find(names.begin(), names.end(), unique) != names.end()) unique = name + "_" + std::to_string(++dup);
      names.push_back(unique);
      curves.push_back(metrics::accuracy_curve(records, taus));
    }

    std::ostringstream csv;
    csv << "tau";
    for (const auto& n : names) csv << ',' << n;
    csv << '\n';
    for (std::size_t k = 0; k < taus.size(); ++k) {
      csv << run::format_double(taus[k]);
      for (const auto& c : curves) csv << ',' << run::format_double(c[k].accuracy);
      csv << '\n';
    }
    write_file(opts.out, csv.str());
    return kExitOk;
  });
}

int cmd_safety(const SafetyOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = run::load_scenario_config(opts.scenario);
    const auto result = metrics::scripted_reaction_experiment(cfg, opts.lead_time);

    json doc;
    doc["lead_time"] = opts.lead_time;
    doc["reaction_delay"] = cfg.policy.reaction_delay;
    doc["seed"] = cfg.seed;
    doc["event"] = {{"vehicle", result.event.vehicle}, {"imminent_time", result.event.imminent_time}};
    doc["no_advisory"] = summary_json(metrics::summarize(result.no_advisory));
    doc["no_advisory"]["brake_start"] = result.brake_start_no_advisory;
    doc["advisory"] = summary_json(metrics::summarize(result.advisory));
    doc["advisory"]["brake_start"] = result.brake_start_advisory;
    write_file(opts.out, doc.dump(2) + "\n");

    if (opts.logs) {
      std::error_code ec;
      fs::create_directories(*opts.logs, ec);
      if (ec) throw IoError(opts.logs->string(), ec.message());
      std::ostringstream a, b;
      run::write_trajectory_csv(result.no_advisory, a);
      run::write_trajectory_csv(result.advisory, b);
      write_file(*opts.logs / "no_advisory.csv", a.str());
      write_file(*opts.logs / "advisory.csv", b.str());
    }
    return kExitOk;
  });
}

}  // namespace dtfusion::cli
