#pragma once

// Outer-loop link adaptation. The offset is a backoff in dB subtracted from
// the SINR implied by the reported CQI: ACKs lower it, NACKs raise it.

#include "xrla/sim/harq.hpp"

namespace xrla::sim {

enum class OllaMode {
    TbOlla,    ///< one update per TB from its aggregate ACK/NACK
    CbgEolla,  ///< one update per CBG bit, steps scaled by 1/M
};

struct OllaParams {
    /// Target error rate: TBER for TbOlla, CBG failure fraction for CbgEolla.
    double target = 0.1;
    double step_up_db = 0.5;
    double initial_db = 0.0;
    double min_db = -25.0;
    double max_db = 15.0;

    /// step_up_db * target / (1 - target), which makes target the fixed point.
    double step_down_db() const;
    void validate() const;
};

class Olla {
public:
    Olla(OllaMode mode, OllaParams params);

    OllaMode mode() const { return mode_; }
    const OllaParams& params() const { return params_; }
    double offset_db() const { return offset_db_; }

    /// Applies first-transmission feedback.
    void update(const CbgFeedback& feedback);

private:
    OllaMode mode_;
    OllaParams params_;
    double offset_db_;
};

}  // namespace xrla::sim
