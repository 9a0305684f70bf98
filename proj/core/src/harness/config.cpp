// Copyright 2026 The TAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tac/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tac::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  std::from_chars_result r;
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for doubles follows the C locale regardless of the global
    // one, which is what a config file wants.
    r = std::from_chars(first, last, out, std::chars_format::general);
  } else {
    r = std::from_chars(first, last, out);
  }
  if (r.ec != std::errc() || r.ptr != last) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct Field {
  const char* key;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define TAC_STRING(name) \
  Field { #name, [](Config& c, const std::string& v) { c.name = v; }, [](const Config& c) { return c.name; } }
#define TAC_NUMBER(name)                                                                                      \
  Field {                                                                                                     \
    #name, [](Config& c, const std::string& v) { c.name = parse_number<decltype(c.name)>(#name, v); },         \
        [](const Config& c) {                                                                                 \
          if constexpr (std::is_floating_point_v<decltype(c.name)>) return format_double(c.name);             \
          else return std::to_string(c.name);                                                                 \
        }                                                                                                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      TAC_STRING(env),          TAC_NUMBER(seed),          TAC_NUMBER(parallel_envs), TAC_STRING(schedule),
      TAC_NUMBER(epsilon),      TAC_NUMBER(eps_min),       TAC_NUMBER(eps_max),       TAC_NUMBER(eps_a),
      TAC_NUMBER(eps_n_tst),    TAC_NUMBER(batch_size),    TAC_NUMBER(lr),            TAC_NUMBER(weight_decay),
      TAC_NUMBER(clip),         TAC_NUMBER(gamma),         TAC_NUMBER(tau),           TAC_NUMBER(vocab_size),
      TAC_NUMBER(embed),        TAC_NUMBER(hidden),        TAC_NUMBER(score_rows),    TAC_NUMBER(max_tokens),
      TAC_NUMBER(memory),       TAC_NUMBER(alpha),         TAC_NUMBER(beta),          TAC_NUMBER(lambda_r),
      TAC_NUMBER(lambda_v),     TAC_NUMBER(lambda_q),      TAC_NUMBER(lambda_t),      TAC_NUMBER(lambda_o),
      TAC_NUMBER(total_steps),  TAC_NUMBER(eval_every),    TAC_NUMBER(eval_episodes), TAC_STRING(eval_mode),
      TAC_NUMBER(max_episode_steps), TAC_NUMBER(stop_score), TAC_NUMBER(env_timeout_ms), TAC_NUMBER(templates),
      TAC_NUMBER(objects),      TAC_STRING(output_dir),
  };
  return f;
}

#undef TAC_STRING
#undef TAC_NUMBER

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> Config::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

void Config::write(std::ostream& out) const {
  for (const auto& f : fields()) out << f.key << " = " << f.get(*this) << "\n";
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in, path.string());
}

void Config::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(!env.empty(), "env must be set");
  require(parallel_envs >= 1, "parallel_envs >= 1");
  require(schedule == "fixed" || schedule == "adaptive", "schedule must be fixed or adaptive");
  require(epsilon >= 0 && epsilon <= 1, "epsilon in [0, 1]");
  require(batch_size >= 1, "batch_size >= 1");
  require(lr >= 0, "lr >= 0");
  require(weight_decay >= 0, "weight_decay >= 0");
  require(clip > 0, "clip > 0");
  require(gamma >= 0 && gamma <= 1, "gamma in [0, 1]");
  require(tau >= 0 && tau <= 1, "tau in [0, 1]");
  require(vocab_size >= 2, "vocab_size >= 2");
  require(embed >= 1 && hidden >= 1 && score_rows >= 1, "embed, hidden, score_rows >= 1");
  require(max_tokens >= 1, "max_tokens >= 1");
  require(memory >= batch_size, "memory >= batch_size");
  require(alpha >= 0 && beta >= 0, "alpha, beta >= 0");
  require(lambda_r >= 0 && lambda_v >= 0 && lambda_q >= 0 && lambda_t >= 0 && lambda_o >= 0, "lambdas >= 0");
  require(total_steps >= 0, "total_steps >= 0");
  require(eval_every >= 1, "eval_every >= 1");
  require(eval_episodes >= 1, "eval_episodes >= 1");
  require(eval_mode == "stochastic" || eval_mode == "greedy", "eval_mode must be stochastic or greedy");
  require(max_episode_steps >= 1, "max_episode_steps >= 1");
  require(env_timeout_ms >= 1, "env_timeout_ms >= 1");
  require(templates >= 1 && objects >= 1, "templates, objects >= 1");
  epsilon_schedule().validate();
}

ModelDims Config::dims(int num_templates, int num_objects) const {
  ModelDims d;
  d.vocab = vocab_size;
  d.embed = embed;
  d.hidden = hidden;
  d.templates = num_templates;
  d.objects = num_objects;
  d.score_rows = score_rows;
  return d;
}

exploration::EpsilonSchedule Config::epsilon_schedule() const {
  exploration::EpsilonSchedule s;
  s.kind = schedule == "adaptive" ? exploration::ScheduleKind::Adaptive : exploration::ScheduleKind::Fixed;
  s.epsilon = epsilon;
  s.eps_min = eps_min;
  s.eps_max = eps_max;
  s.a = eps_a;
  s.n_tst = eps_n_tst;
  return s;
}

objectives::UpdateOptions Config::update_options() const {
  objectives::UpdateOptions o;
  o.gamma = gamma;
  o.clip = clip;
  o.tau = tau;
  o.weights = objectives::LossWeights{lambda_r, lambda_v, lambda_q, lambda_t, lambda_o};
  return o;
}

replay::PerOptions Config::per_options() const {
  replay::PerOptions o;
  o.capacity = static_cast<std::size_t>(memory);
  o.alpha = alpha;
  o.beta = beta;
  return o;
}

}  // namespace tac::harness
