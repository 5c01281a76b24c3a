#include "kgens/synthetic.hpp"

#include "kgens/error.hpp"
#include "kgens/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

namespace kgens {

using nlohmann::json;

namespace {

SourceRole parse_role(const std::string& role) {
  if (role == "signal") return SourceRole::signal;
  if (role == "noise") return SourceRole::noise;
  if (role == "kg-correlated") return SourceRole::kg_correlated;
  fail(ErrorKind::Config, "unknown source role '" + role + "'");
}

std::string role_name(SourceRole role) {
  switch (role) {
  case SourceRole::signal: return "signal";
  case SourceRole::noise: return "noise";
  case SourceRole::kg_correlated: return "kg-correlated";
  }
  return "noise";
}

void validate(const SyntheticSpec& spec) {
  require(spec.n > 0, ErrorKind::Degenerate, "synthetic spec has zero samples");
  require(spec.classes >= 2, ErrorKind::Degenerate, "synthetic spec needs at least 2 classes");
  require(!spec.sources.empty(), ErrorKind::Degenerate, "synthetic spec has no sources");
  require(spec.label_noise >= 0.0 && spec.label_noise < 1.0, ErrorKind::Config,
          "label_noise must lie in [0,1)");
  std::unordered_map<std::string, SourceRole> roles;
  for (const auto& s : spec.sources) {
    require(!s.id.empty(), ErrorKind::Config, "source with empty id");
    require(s.dim > 0, ErrorKind::Degenerate, "source '" + s.id + "' has zero dims");
    require(roles.emplace(s.id, s.role).second, ErrorKind::DuplicateId, "source '" + s.id + "' declared twice");
    if (s.role == SourceRole::signal)
      require(s.dim >= static_cast<std::size_t>(spec.classes), ErrorKind::Degenerate,
              "signal source '" + s.id + "' needs dim >= classes");
  }
  for (const auto& s : spec.sources)
    for (const auto& ref : s.correlates_with) {
      auto it = roles.find(ref);
      require(it != roles.end(), ErrorKind::UnknownSource, "source '" + s.id + "' correlates with unknown '" + ref + "'");
      require(it->second != SourceRole::kg_correlated, ErrorKind::Config,
              "source '" + s.id + "' cannot mirror another kg-correlated source");
    }
}

} // namespace

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("synthetic spec: ") + e.what());
  }
  try {
    SyntheticSpec spec;
    spec.n = doc.at("n").get<std::size_t>();
    spec.classes = doc.value("classes", 2);
    spec.seed = doc.value("seed", std::uint64_t{42});
    spec.label_noise = doc.value("label_noise", 0.0);
    spec.signal_strength = doc.value("signal_strength", spec.signal_strength);
    spec.latent_scale = doc.value("latent_scale", spec.latent_scale);
    spec.class_noise = doc.value("class_noise", spec.class_noise);
    for (const auto& s : doc.at("sources")) {
      SyntheticSource src;
      src.id = s.at("id").get<std::string>();
      src.dim = s.at("dim").get<std::size_t>();
      src.role = parse_role(s.value("role", std::string("noise")));
      if (s.contains("correlates_with"))
        src.correlates_with = s.at("correlates_with").get<std::vector<std::string>>();
      spec.sources.push_back(std::move(src));
    }
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("synthetic spec: ") + e.what());
  }
}

std::string synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::ordered_json doc;
  doc["n"] = spec.n;
  doc["classes"] = spec.classes;
  doc["seed"] = spec.seed;
  doc["label_noise"] = spec.label_noise;
  doc["signal_strength"] = spec.signal_strength;
  doc["latent_scale"] = spec.latent_scale;
  doc["class_noise"] = spec.class_noise;
  doc["sources"] = nlohmann::ordered_json::array();
  for (const auto& s : spec.sources) {
    nlohmann::ordered_json src;
    src["id"] = s.id;
    src["dim"] = s.dim;
    src["role"] = role_name(s.role);
    if (!s.correlates_with.empty()) src["correlates_with"] = s.correlates_with;
    doc["sources"].push_back(std::move(src));
  }
  return doc.dump(2);
}

SyntheticData gen_synthetic_detailed(const SyntheticSpec& spec, std::uint64_t seed) {
  validate(spec);
  const std::size_t n = spec.n;
  const int c = spec.classes;
  Rng rng(seed);

  SyntheticData out;
  out.true_labels.resize(n);
  for (auto& y : out.true_labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(c)));

  const auto n_noised = static_cast<std::size_t>(std::llround(spec.label_noise * static_cast<double>(n)));
  Indices order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  out.noised.assign(n, false);
  for (std::size_t i = 0; i < n_noised; ++i) out.noised[order[i]] = true;

  Labels observed = out.true_labels;
  for (std::size_t i = 0; i < n; ++i)
    if (out.noised[i])
      observed[i] = static_cast<int>((observed[i] + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(c - 1)))) % c);

  std::vector<const SyntheticSource*> signal_sources;
  std::size_t background_dims = 0;
  for (const auto& s : spec.sources) {
    if (s.role == SourceRole::signal) signal_sources.push_back(&s);
    if (s.role != SourceRole::kg_correlated) background_dims += s.dim;
  }
  const std::size_t k_signal = signal_sources.size();

  std::unordered_map<std::string, MatrixF> generated;
  std::size_t global_coord = 0;
  const auto coord_scale = [&](std::size_t g) {
    return std::exp(-static_cast<double>(g) / static_cast<double>(std::max<std::size_t>(background_dims, 1)));
  };

  // Signal and noise sources first, in declaration order.
  for (const auto& s : spec.sources) {
    if (s.role == SourceRole::kg_correlated) continue;
    generated[s.id] = MatrixF(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s.dim));
    const std::size_t first_background = s.role == SourceRole::signal ? static_cast<std::size_t>(c) : 0;
    for (std::size_t j = first_background; j < s.dim; ++j) {
      const double scale = coord_scale(global_coord++);
      for (std::size_t i = 0; i < n; ++i)
        generated[s.id](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            static_cast<float>(scale * rng.normal());
    }
  }

  // Signal coordinates: latent terms that cancel across signal sources.
  if (k_signal > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < c; ++j) {
        const double target =
            spec.signal_strength * ((out.true_labels[i] == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(c));
        double running = 0.0;
        for (std::size_t k = 0; k < k_signal; ++k) {
          double value;
          if (k + 1 < k_signal) {
            value = spec.latent_scale * (1.0 + 0.25 * j) * (1.0 + 0.3 * static_cast<double>(k)) * rng.normal();
            running += value;
          } else {
            value = target - running;
          }
          value += spec.class_noise * rng.normal();
          generated[signal_sources[k]->id](static_cast<Eigen::Index>(i), j) = static_cast<float>(value);
        }
      }
    }
  }

  // Knowledge sources mirror their reference concatenation, sign-flipped on noised rows.
  for (const auto& s : spec.sources) {
    if (s.role != SourceRole::kg_correlated) continue;
    std::vector<const MatrixF*> refs;
    if (!s.correlates_with.empty()) {
      for (const auto& ref : s.correlates_with) refs.push_back(&generated.at(ref));
    } else {
      for (const auto* sig : signal_sources) refs.push_back(&generated.at(sig->id));
      if (refs.empty())
        for (const auto& other : spec.sources)
          if (other.role != SourceRole::kg_correlated) refs.push_back(&generated.at(other.id));
    }
    MatrixF kg(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s.dim));
    for (std::size_t i = 0; i < n; ++i) {
      const float sign = out.noised[i] ? -1.0f : 1.0f;
      std::size_t j = 0;
      for (const auto* ref : refs)
        for (Eigen::Index r = 0; r < ref->cols() && j < s.dim; ++r, ++j)
          kg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              sign * (*ref)(static_cast<Eigen::Index>(i), r);
      for (; j < s.dim; ++j)
        kg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<float>(0.01 * rng.normal());
    }
    generated[s.id] = std::move(kg);
  }

  const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%0*zu", width, i);
    ids[i] = buf;
  }

  std::vector<EmbeddingSet> sets;
  for (const auto& s : spec.sources) {
    EmbeddingSet set;
    set.source_id = s.id;
    set.vectors = std::move(generated[s.id]);
    sets.push_back(std::move(set));
  }
  out.dataset = align(std::move(sets), make_label_table(std::move(ids), std::move(observed), c));
  return out;
}

SyntheticSpec signal_split_spec(std::size_t n, int classes) {
  SyntheticSpec spec;
  spec.n = n;
  spec.classes = classes;
  spec.sources = {{"model_a", 32, SourceRole::signal, {}}, {"model_b", 32, SourceRole::signal, {}}};
  return spec;
}

SyntheticSpec kg_correlated_spec(std::size_t n, double label_noise) {
  SyntheticSpec spec;
  spec.n = n;
  spec.classes = 2;
  spec.label_noise = label_noise;
  spec.sources = {{"model_a", 32, SourceRole::signal, {}},
                  {"model_b", 32, SourceRole::signal, {}},
                  {"cnet", 300, SourceRole::kg_correlated, {}},
                  {"wiki", 500, SourceRole::noise, {}}};
  return spec;
}

SyntheticSpec chance_spec(std::size_t n, int classes, std::size_t dim) {
  SyntheticSpec spec;
  spec.n = n;
  spec.classes = classes;
  spec.sources = {{"noise", dim, SourceRole::noise, {}}};
  return spec;
}

} // namespace kgens
