#include "zonenet/setup.hpp"

#include <algorithm>
#include <stdexcept>

namespace zonenet {

namespace {

TreeCotree decompose(const ZoneNetwork& network, const NetworkConfig& cfg) {
  if (cfg.preferred_independent.empty()) {
    const auto cotree = find_cotree(network);
    return tree_cotree_decompose(network, std::span<const std::size_t>(cotree));
  }
  return tree_cotree_decompose(network, std::span<const std::string>(cfg.preferred_independent));
}

}  // namespace

std::string SensorSchema::co2_column(const std::string& zone) const {
  const auto it = co2_columns.find(zone);
  return it == co2_columns.end() ? "co2_" + zone : it->second;
}

std::string SensorSchema::temp_column(const std::string& zone) const {
  const auto it = temp_columns.find(zone);
  return it == temp_columns.end() ? "temp_" + zone : it->second;
}

PhysicalParams GroundTruth::params() const {
  return {Eigen::VectorXd::Zero(capacitances.size()), independent_flows, resistances, capacitances};
}

GroundTruth resolve_truth(const TruthSpec& spec, const AmbientSpec& ambient,
                          const ZoneNetwork& network, const TreeCotree& decomp) {
  const auto& iz = network.interior_zones();
  const auto nz = static_cast<Eigen::Index>(iz.size());
  GroundTruth t;
  t.ambient = ambient;

  auto interior_slot = [&](const std::string& id) {
    const std::size_t slot = network.interior_slot(network.zone_index(id));
    if (slot == ZoneNetwork::npos) throw std::invalid_argument("truth names boundary zone " + id);
    return static_cast<Eigen::Index>(slot);
  };

  if (spec.schedule.empty()) throw std::invalid_argument("truth needs an occupancy schedule");
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& [time, occ] : spec.schedule) {
    if (!(time > last)) throw std::invalid_argument("occupancy breakpoints must be strictly increasing");
    last = time;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(nz);
    for (const auto& [id, n] : occ) {
      if (n < 0.0) throw std::invalid_argument("negative occupancy for zone " + id);
      v[interior_slot(id)] = n;
    }
    t.schedule.breakpoints.emplace_back(time, std::move(v));
  }

  t.independent_flows = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(decomp.cotree_edges.size()));
  std::vector<bool> seen(decomp.cotree_edges.size(), false);
  for (const auto& [id, q] : spec.independent_flows) {
    const std::size_t e = network.flow_edge_index(id);
    const auto it = std::find(decomp.cotree_edges.begin(), decomp.cotree_edges.end(), e);
    if (it == decomp.cotree_edges.end())
      throw std::invalid_argument("truth flow " + id + " is not an independent edge");
    const auto k = static_cast<std::size_t>(it - decomp.cotree_edges.begin());
    t.independent_flows[static_cast<Eigen::Index>(k)] = q;
    seen[k] = true;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k])
      throw std::invalid_argument("truth is missing independent flow " +
                                  network.flow_edges()[decomp.cotree_edges[k]].id);

  t.resistances.resize(static_cast<Eigen::Index>(network.thermal_edges().size()));
  for (std::size_t e = 0; e < network.thermal_edges().size(); ++e) {
    const auto& id = network.thermal_edges()[e].id;
    const auto it = spec.resistances.find(id);
    if (it == spec.resistances.end()) throw std::invalid_argument("truth is missing resistance " + id);
    t.resistances[static_cast<Eigen::Index>(e)] = it->second;
  }
  if (spec.resistances.size() != network.thermal_edges().size())
    throw std::invalid_argument("truth lists resistances for unknown thermal edges");

  t.capacitances.resize(nz);
  for (std::size_t s = 0; s < iz.size(); ++s) {
    const auto& id = network.zones()[iz[s]].id;
    const auto it = spec.capacitances.find(id);
    if (it == spec.capacitances.end()) throw std::invalid_argument("truth is missing capacitance " + id);
    t.capacitances[static_cast<Eigen::Index>(s)] = it->second;
  }
  if (spec.capacitances.size() != iz.size())
    throw std::invalid_argument("truth lists capacitances for non-interior zones");

  t.co2_0 = Eigen::VectorXd::Constant(nz, spec.co2_initial);
  t.temp_0 = Eigen::VectorXd::Constant(nz, spec.temp_initial);
  return t;
}

Eigen::VectorXd default_initial_vector(const InitialGuess& guess, const PriorSet& priors) {
  const auto& L = priors.layout;
  Eigen::VectorXd theta(L.dim());
  for (std::size_t i = 0; i < priors.specs.size(); ++i) theta[static_cast<Eigen::Index>(i)] = priors.specs[i].mu;
  auto set = [&](Block b, const std::optional<double>& v) {
    if (v) theta.segment(L.offset(b), L.size(b)).setConstant(*v);
  };
  set(Block::occupancy, guess.occupancy);
  set(Block::flows, guess.flows);
  set(Block::co2_initial, guess.co2_initial);
  set(Block::resistance, guess.resistances);
  set(Block::capacitance, guess.capacitances);
  set(Block::temp_initial, guess.temp_initial);
  set(Block::sigma_co2, guess.sigma_co2);
  set(Block::sigma_temp, guess.sigma_temp);
  return theta;
}

Setup::Setup(ProjectConfig cfg)
    : config(std::move(cfg)),
      network(build_network(config.network)),
      decomp(decompose(network, config.network)),
      model(network, decomp, config.knowns, config.substep),
      priors(make_priors(config.priors, network, decomp)),
      layout(priors.layout) {
  if (config.truth) truth = resolve_truth(*config.truth, config.ambient, network, decomp);
  default_theta0 = default_initial_vector(config.initial_guess, priors);
}

InferenceSettings Setup::inference() const {
  InferenceSettings s;
  s.ram = config.ram;
  s.default_theta0 = default_theta0;
  s.scale_floor_fraction = config.windows.scale_floor_fraction;
  s.n_draws = config.windows.n_draws;
  s.max_stored_samples = config.windows.max_stored_samples;
  s.horizon = config.windows.horizon;
  return s;
}

}  // namespace zonenet
