#pragma once

#include "perseus/attacks.hpp"
#include "perseus/metrics.hpp"
#include "perseus/model.hpp"
#include "perseus/observation.hpp"
#include "perseus/types.hpp"

#include <string>

namespace perseus {

// Split masks as a JSON object with "train"/"val"/"test" id arrays.
void save_splits(const std::string& path, const SplitMasks& masks);
SplitMasks load_splits(const std::string& path);

// Perturbation record as JSON: {"rate":..., "added":[[u,v],...], "removed":[...]}.
void save_record(const std::string& path, const PerturbationRecord& rec);
PerturbationRecord load_record(const std::string& path);

// Edge score table as CSV with header u,v,score,rank (normalized score;
// rank 1 = easiest).
void save_scores(const std::string& path, const EdgeScoreTable& table);

// Ratio curve as CSV with header r,k,r_p,r_o.
void save_curve(const std::string& path, const RatioCurve& curve);

// Training trace as CSV with header stage,epoch,train_loss,val_loss,val_acc.
void save_epochs(const std::string& path, const std::vector<EpochRow>& rows);

// Stage schedule as JSON lines, one object per stage.
void save_stages(const std::string& path, const std::vector<StageLog>& stages);

// Weight matrices: uint64 count, then per matrix uint64 rows/cols followed by
// row-major float64 entries. Little-endian, native layout.
void save_params(const std::string& path, const ModelParams& params);
ModelParams load_params(const std::string& path);

}  // namespace perseus
