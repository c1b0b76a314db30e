// Copyright 2026 The eigentrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <memory>

#include "eigentrack/bath.hpp"
#include "eigentrack/models.hpp"
#include "eigentrack/partition.hpp"

namespace eigentrack::testing {

// Open qubit with a rectangular train, solved through to the partitioned
// adiabatic-frame blocks.
struct OpenQubitCase {
  std::shared_ptr<const Control> control;
  OpenQubitModel model;
  TimeGrid grid;
  DecayFunctions decay;
  SpectralFrame frame;
  AdiabaticFrameOps ops;
  PartitionBlocks blocks;

  OpenQubitCase(double total, std::size_t steps, double coupling, double memory_rate,
                ControlVariant variant = NoControl{}, double baseline = 1.0)
      : control(std::make_shared<const Control>(ControlSignal{baseline, variant}, total)),
        model(control, total),
        grid(0.0, total, steps),
        decay(solve_c_plus(BathSpec{coupling, memory_rate}, control, grid)),
        frame(open_qubit_frame(model, grid)),
        ops(build_adiabatic_ops(frame, model.dissipator(decay))) {
    const auto events = control->events();
    ops.breakpoints.assign(events.begin(), events.end());
    blocks = partition(ops, OpenQubitModel::kTargetIndex);
  }

  // <E_-(t_i)| rho_i |E_-(t_i)> from a lab-frame oracle run.
  std::vector<double> oracle_population(int substeps = 4) const {
    const ComplexVector e0 = model.eigenvectors(0.0).col(OpenQubitModel::kExcitedLevel);
    OracleOptions opts;
    opts.substeps = substeps;
    const auto bp = control->breakpoints();
    opts.breakpoints.assign(bp.begin(), bp.end());
    const DensityTrajectory lv = bruteforce_liouville(model.lab_liouvillian(decay), e0 * e0.adjoint(), grid, opts);
    std::vector<double> p;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const ComplexVector e = model.eigenvectors(grid.at(i)).col(OpenQubitModel::kExcitedLevel);
      p.push_back(e.dot(lv.rho[i] * e).real());
    }
    return p;
  }
};

}  // namespace eigentrack::testing
