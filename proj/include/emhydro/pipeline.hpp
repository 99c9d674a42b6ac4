#pragma once

// Batch drivers shared by the CLI and the acceptance suite: preset fields,
// ensemble construction, and the evolve / trace / reconstruct / verify /
// compare pipelines.

#include <iosfwd>
#include <string>
#include <vector>

#include "emhydro/config.hpp"
#include "emhydro/reconstruction.hpp"
#include "emhydro/snapshot.hpp"

namespace emhydro::pipeline {

fields::EMFieldGrid initial_em(const cfg::RunConfig& cfg);

// throws ConstraintViolation if the initial data fail the t=0 constraints
eulerian::SpectralField make_field(const cfg::RunConfig& cfg);

lagrangian::EnsembleSpec ensemble_spec(const cfg::RunConfig& cfg,
                                       const eulerian::SpectralField& field);

// lattice with initial-node labels dropped
std::vector<lagrangian::FluidLabel> make_labels(const cfg::RunConfig& cfg,
                                                const eulerian::SpectralField& field,
                                                size_t& dropped);

recon::ReconOptions recon_options(const cfg::RunConfig& cfg,
                                  const eulerian::SpectralField& field, int workers);

// exit codes: 0 ok, 2 config/file, 3 constraint violation, 4 trajectory failure
int cmd_evolve(const cfg::RunConfig& cfg, const std::string& outdir,
               const std::vector<double>& times, std::ostream& log);
int cmd_trace(const cfg::RunConfig& cfg, const std::string& outdir, std::ostream& log);
int cmd_reconstruct(const cfg::RunConfig& cfg, const std::string& outdir,
                    const std::vector<double>& times, int workers, std::ostream& log);
int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& log);
int cmd_verify(const cfg::RunConfig& cfg, const std::vector<std::string>& snapshots,
               std::ostream& log);
int cmd_demo(const std::string& outdir, int workers, std::ostream& log);

// canned configurations (also used by tests)
cfg::RunConfig plane_wave_run();     // the Sec. 5 regression setup
cfg::RunConfig standing_wave_run();  // nonzero-Q counterpart

}  // namespace emhydro::pipeline
