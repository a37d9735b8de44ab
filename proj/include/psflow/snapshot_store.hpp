#ifndef PSFLOW_SNAPSHOT_STORE_HPP
#define PSFLOW_SNAPSHOT_STORE_HPP

#include <optional>
#include <sstream>
#include <vector>

#include "psflow/field.hpp"

namespace psflow {

/// One stored state of the prototype flow.
struct SnapshotEntry {
    double s;            ///< prototype time
    Field field;         ///< v(., s)
    double gamma;        ///< ||v(s)||_{q+1}
    double grad_energy;  ///< ||grad v(s)||_p^p
};

/// One accepted solver step; the dense energy ledger.
struct LedgerRow {
    double s;
    double gamma;            ///< ||v||_{q+1}
    double mass_q1;          ///< ||v||_{q+1}^{q+1}
    double grad_energy;      ///< ||grad v||_p^p
    double dissipation;      ///< cumulative (q+1)/q int ||grad v||_p^p ds (trapezoid)
    double max_v;
    double min_v;
    double ds;
    int newton_iters;
    double energy_residual;  ///< per-step energy-balance defect
};

/// Append-only time-indexed trajectory of the prototype flow, plus the
/// per-step energy ledger of the run that produced it.
class SnapshotStore {
public:
    void append(SnapshotEntry e) {
        if (!entries_.empty()) {
            if (!(e.s > entries_.back().s))
                throw data_integrity_error("SnapshotStore: snapshot times must be strictly increasing");
            if (e.gamma > entries_.back().gamma + 1e-10) {
                std::ostringstream os;
                os << "SnapshotStore: gamma increased from " << entries_.back().gamma << " to "
                   << e.gamma << " at s = " << e.s;
                throw data_integrity_error(os.str());
            }
        }
        entries_.push_back(std::move(e));
    }

    const std::vector<SnapshotEntry>& entries() const { return entries_; }
    const SnapshotEntry& front() const { return entries_.front(); }
    const SnapshotEntry& back() const { return entries_.back(); }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    std::vector<LedgerRow>& ledger() { return ledger_; }
    const std::vector<LedgerRow>& ledger() const { return ledger_; }

    std::optional<double> extinction_time() const { return extinction_time_; }
    void set_extinction_time(double s) { extinction_time_ = s; }

private:
    std::vector<SnapshotEntry> entries_;
    std::vector<LedgerRow> ledger_;
    std::optional<double> extinction_time_;
};

} // namespace psflow

#endif
