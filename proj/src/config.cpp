#include "cccrl/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cccrl/csv.hpp"

namespace cccrl {

std::string effect_kind_name(EffectKind e) {
  return e == EffectKind::kReward ? "reward" : "next_state";
}

EffectKind effect_kind_from_name(const std::string& name) {
  if (name == "reward") return EffectKind::kReward;
  if (name == "next_state") return EffectKind::kNextState;
  throw std::invalid_argument("unknown effect kind: " + name);
}

EnvSpec ExperimentConfig::base_env() const {
  EnvSpec spec;
  spec.kind = task;
  spec.phi = env_phi;
  if (env_noise_sd >= 0.0) spec.noise_sd = env_noise_sd;
  spec.dt = env_dt;
  spec.horizon = env_horizon;
  spec.action_bound = env_action_bound;
  return with_defaults(spec);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Parser {
  ExperimentConfig cfg;
  std::string section;
  bool group_open = false;

  double num(const std::string& v, const std::string& key) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad number for " + key + ": " + v);
    }
  }

  void top_level(const std::string& key, const std::string& value) {
    if (key == "task") {
      cfg.task = env_kind_from_name(value);
    } else if (key == "effect") {
      cfg.effect = effect_kind_from_name(value);
    } else if (key == "samples") {
      cfg.samples = static_cast<Eigen::Index>(num(value, key));
    } else if (key == "interval") {
      std::istringstream in(value);
      if (!(in >> cfg.interval_lo >> cfg.interval_hi)) {
        throw std::invalid_argument("config: interval needs two numbers");
      }
    } else if (key == "seeds") {
      cfg.seeds.clear();
      std::istringstream in(value);
      std::uint64_t s;
      while (in >> s) cfg.seeds.push_back(s);
      if (cfg.seeds.empty()) {
        throw std::invalid_argument("config: seeds must be non-empty");
      }
    } else if (key == "out") {
      cfg.out_dir = value;
    } else {
      throw std::invalid_argument("config: unknown key " + key);
    }
  }

  void group(const std::string& key, const std::string& value) {
    GroupSpec& g = cfg.groups.back();
    if (key == "param") {
      g.param = value;
    } else if (key == "mean") {
      g.mean = num(value, key);
    } else if (key == "sd") {
      g.sd = num(value, key);
    } else if (key == "count") {
      g.count = static_cast<int>(num(value, key));
    } else {
      throw std::invalid_argument("config: unknown group key " + key);
    }
  }

  void extract(const std::string& key, const std::string& value) {
    if (key == "latent_dim") {
      cfg.anm.latent_dim = static_cast<Eigen::Index>(num(value, key));
    } else if (key == "lambda") {
      cfg.anm.lambda = num(value, key);
    } else if (key == "encoder_hidden") {
      cfg.anm.encoder_hidden = static_cast<Eigen::Index>(num(value, key));
    } else if (key == "max_iters") {
      cfg.anm.max_iters = static_cast<int>(num(value, key));
    } else if (key == "bandwidth_refresh") {
      cfg.anm.bandwidth_refresh = static_cast<int>(num(value, key));
    } else if (key == "components") {
      cfg.components = value == "auto" ? -1 : static_cast<int>(num(value, key));
    } else {
      throw std::invalid_argument("config: unknown extract key " + key);
    }
  }

  void env(const std::string& key, const std::string& value) {
    if (key == "dt") {
      cfg.env_dt = num(value, key);
    } else if (key == "horizon") {
      cfg.env_horizon = static_cast<int>(num(value, key));
    } else if (key == "action_bound") {
      cfg.env_action_bound = num(value, key);
    } else if (key == "noise_sd") {
      cfg.env_noise_sd = num(value, key);
    } else if (key == "phi") {
      cfg.env_phi = num(value, key);
    } else {
      throw std::invalid_argument("config: unknown env key " + key);
    }
  }

  void train(const std::string& key, const std::string& value) {
    if (key == "scheme") {
      cfg.scheme = share_scheme_from_name(value);
    } else if (key == "epochs") {
      cfg.train.epochs = static_cast<int>(num(value, key));
    } else if (key == "steps_per_epoch") {
      cfg.train.steps_per_epoch = static_cast<int>(num(value, key));
    } else if (key == "batch") {
      cfg.train.batch = static_cast<int>(num(value, key));
    } else if (key == "sigma1") {
      cfg.train.sigma1 = num(value, key);
    } else if (key == "sigma2") {
      cfg.train.sigma2 = num(value, key);
    } else if (key == "decay") {
      cfg.train.decay = num(value, key);
    } else if (key == "ou_theta") {
      cfg.train.ou_theta = num(value, key);
    } else if (key == "buffer_capacity") {
      cfg.train.buffer_capacity = static_cast<std::size_t>(num(value, key));
    } else if (key == "divergence_tolerance") {
      cfg.train.divergence_tolerance = static_cast<int>(num(value, key));
    } else if (key == "gamma") {
      cfg.ddpg.gamma = num(value, key);
    } else if (key == "tau") {
      cfg.ddpg.tau = num(value, key);
    } else if (key == "actor_lr") {
      cfg.ddpg.actor_lr = num(value, key);
    } else if (key == "critic_lr") {
      cfg.ddpg.critic_lr = num(value, key);
    } else if (key == "seed_noise_sd") {
      cfg.seed_noise_sd = num(value, key);
    } else {
      throw std::invalid_argument("config: unknown train key " + key);
    }
  }

  void line(const std::string& raw) {
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) return;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw std::invalid_argument("config: malformed section " + s);
      }
      section = trim(s.substr(1, s.size() - 2));
      if (section == "group") {
        cfg.groups.emplace_back();
      } else if (section != "extract" && section != "env" &&
                 section != "train") {
        throw std::invalid_argument("config: unknown section " + section);
      }
      return;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value, got " + s);
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) {
      top_level(key, value);
    } else if (section == "group") {
      group(key, value);
    } else if (section == "extract") {
      extract(key, value);
    } else if (section == "env") {
      env(key, value);
    } else if (section == "train") {
      train(key, value);
    }
  }
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Parser parser;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    try {
      parser.line(raw);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (line " +
                                  std::to_string(lineno) + ")");
    }
  }
  if (parser.cfg.samples < 2) {
    throw std::invalid_argument("config: samples must be >= 2");
  }
  if (!(parser.cfg.interval_lo < parser.cfg.interval_hi)) {
    throw std::invalid_argument("config: interval must be non-degenerate");
  }
  return parser.cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto d = [](double v) { return format_double(v); };
  out << "task = " << env_kind_name(c.task) << "\n";
  out << "effect = " << effect_kind_name(c.effect) << "\n";
  out << "samples = " << c.samples << "\n";
  out << "interval = " << d(c.interval_lo) << " " << d(c.interval_hi) << "\n";
  out << "seeds =";
  for (auto s : c.seeds) out << " " << s;
  out << "\n";
  out << "out = " << c.out_dir << "\n";
  for (const auto& g : c.groups) {
    out << "\n[group]\n";
    out << "param = " << g.param << "\n";
    out << "mean = " << d(g.mean) << "\n";
    out << "sd = " << d(g.sd) << "\n";
    out << "count = " << g.count << "\n";
  }
  out << "\n[extract]\n";
  out << "latent_dim = " << c.anm.latent_dim << "\n";
  out << "lambda = " << d(c.anm.lambda) << "\n";
  out << "encoder_hidden = " << c.anm.encoder_hidden << "\n";
  out << "max_iters = " << c.anm.max_iters << "\n";
  out << "bandwidth_refresh = " << c.anm.bandwidth_refresh << "\n";
  out << "components = ";
  if (c.components < 0) {
    out << "auto";
  } else {
    out << c.components;
  }
  out << "\n";
  out << "\n[env]\n";
  out << "dt = " << d(c.env_dt) << "\n";
  out << "horizon = " << c.env_horizon << "\n";
  out << "action_bound = " << d(c.env_action_bound) << "\n";
  out << "noise_sd = " << d(c.env_noise_sd) << "\n";
  out << "phi = " << d(c.env_phi) << "\n";
  out << "\n[train]\n";
  out << "scheme = " << share_scheme_name(c.scheme) << "\n";
  out << "epochs = " << c.train.epochs << "\n";
  out << "steps_per_epoch = " << c.train.steps_per_epoch << "\n";
  out << "batch = " << c.train.batch << "\n";
  out << "gamma = " << d(c.ddpg.gamma) << "\n";
  out << "tau = " << d(c.ddpg.tau) << "\n";
  out << "actor_lr = " << d(c.ddpg.actor_lr) << "\n";
  out << "critic_lr = " << d(c.ddpg.critic_lr) << "\n";
  out << "sigma1 = " << d(c.train.sigma1) << "\n";
  out << "sigma2 = " << d(c.train.sigma2) << "\n";
  out << "decay = " << d(c.train.decay) << "\n";
  out << "ou_theta = " << d(c.train.ou_theta) << "\n";
  out << "buffer_capacity = " << c.train.buffer_capacity << "\n";
  out << "divergence_tolerance = " << c.train.divergence_tolerance << "\n";
  out << "seed_noise_sd = " << d(c.seed_noise_sd) << "\n";
  return out.str();
}

}  // namespace cccrl
