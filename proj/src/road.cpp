#include "ipva/road.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"

namespace ipva {

double RoadModel::intensity() const {
  return 2.0 * std::numbers::pi * roughness * speed;
}

double RoadModel::stationary_variance() const {
  if (cutoff <= 0.0) return std::numeric_limits<double>::infinity();
  return intensity() / (2.0 * cutoff);
}

double RoadModel::psd(double omega) const {
  return intensity() / (omega * omega + cutoff * cutoff);
}

void RoadModel::validate() const {
  if (!(roughness >= 0.0)) throw Error(ErrorKind::kConfig, "Gr must be >= 0");
  if (!(speed > 0.0)) throw Error(ErrorKind::kConfig, "V must be > 0");
  if (!(cutoff >= 0.0)) throw Error(ErrorKind::kConfig, "wc must be >= 0");
  if (!(sample_period > 0.0)) throw Error(ErrorKind::kConfig, "Ts must be > 0");
}

double RoadSignal::power() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return acc / static_cast<double>(samples.size());
}

RoadSignal generate(const RoadModel& model, double duration) {
  model.validate();
  if (!(duration > 0.0)) {
    throw Error(ErrorKind::kConfig, "road duration must be > 0");
  }
  const auto n = static_cast<std::size_t>(
      std::llround(duration / model.sample_period));
  RoadSignal out;
  out.model = model;
  out.samples.assign(n, 0.0);
  if (model.roughness == 0.0 || n == 0) return out;

  const double ts = model.sample_period;
  const double d = model.intensity();
  double decay = 1.0;
  double step_var = d * ts;
  if (model.cutoff > 0.0) {
    decay = std::exp(-model.cutoff * ts);
    step_var = d * (1.0 - decay * decay) / (2.0 * model.cutoff);
  }
  const double step_sd = std::sqrt(step_var);

  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double x = model.cutoff > 0.0
                 ? std::sqrt(model.stationary_variance()) * normal(rng)
                 : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.samples[k] = x;
    x = decay * x + step_sd * normal(rng);
  }
  return out;
}

RoadSignal corrupt(const RoadSignal& signal, double snr_db,
                   std::uint64_t seed) {
  if (!(snr_db > 0.0)) throw Error(ErrorKind::kConfig, "SNR must be > 0 dB");
  RoadSignal out = signal;
  const double noise_sd =
      std::sqrt(signal.power() / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed ^ 0x5bd1e9955bd1e995ULL);
  std::normal_distribution<double> normal(0.0, noise_sd);
  for (double& s : out.samples) s += normal(rng);
  return out;
}

std::string PreviewMode::name() const {
  switch (kind) {
    case Kind::kPerfect: return "perfect";
    case Kind::kLrde: return "lrde";
    case Kind::kNoisy: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "snr%g", snr_db);
      return buf;
    }
  }
  return "unknown";
}

PreviewMode PreviewMode::parse(const std::string& name) {
  if (name == "perfect") return perfect();
  if (name == "lrde") return lrde();
  if (name.rfind("snr", 0) == 0) {
    try {
      const double db = std::stod(name.substr(3));
      if (db > 0.0) return noisy(db);
    } catch (...) {
    }
  }
  throw Error(ErrorKind::kConfig, "unknown preview mode '" + name + "'");
}

PreviewSource::PreviewSource(const RoadSignal& signal, PreviewMode mode,
                             std::uint64_t noise_seed)
    : signal_(&signal), mode_(mode) {
  if (mode_.kind == PreviewMode::Kind::kNoisy) {
    noisy_ = corrupt(signal, mode_.snr_db, noise_seed);
  }
}

Eigen::VectorXd PreviewSource::window(std::size_t k, int horizon,
                                      double w_hat) const {
  if (horizon < 1) throw Error(ErrorKind::kConfig, "horizon must be >= 1");
  if (mode_.kind == PreviewMode::Kind::kLrde) {
    return Eigen::VectorXd::Constant(horizon, w_hat);
  }
  const RoadSignal& src = previewed();
  if (k + static_cast<std::size_t>(horizon) > src.size()) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "preview window [" + std::to_string(k) + ", " +
                    std::to_string(k + horizon) + ") exceeds realization of " +
                    std::to_string(src.size()) + " samples");
  }
  return Eigen::Map<const Eigen::VectorXd>(src.samples.data() + k, horizon);
}

Eigen::VectorXd preview(const RoadSignal& signal, std::size_t k, int horizon,
                        const PreviewMode& mode, double w_hat,
                        std::uint64_t noise_seed) {
  return PreviewSource(signal, mode, noise_seed).window(k, horizon, w_hat);
}

void write_road_csv(const std::string& path, const RoadSignal& signal) {
  CsvWriter csv(path);
  csv.header({"time_s", "displacement_m"});
  for (std::size_t k = 0; k < signal.size(); ++k) {
    csv.field(static_cast<double>(k) * signal.sample_period())
        .field(signal.samples[k]);
    csv.end_row();
  }
}

RoadSignal read_road_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  RoadSignal out;
  if (table.rows.size() < 2) {
    throw Error(ErrorKind::kTooShort, "road CSV needs at least two rows");
  }
  for (const auto& row : table.rows) {
    if (row.size() < 2) throw Error(ErrorKind::kConfig, "road CSV needs 2 columns");
    out.samples.push_back(row[1]);
  }
  out.model.sample_period = table.rows[1][0] - table.rows[0][0];
  out.model.validate();
  return out;
}

}  // namespace ipva
