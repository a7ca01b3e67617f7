#include "xrla/sim/olla.hpp"

#include <algorithm>
#include <stdexcept>

namespace xrla::sim {

double OllaParams::step_down_db() const
{
    return step_up_db * target / (1.0 - target);
}

void OllaParams::validate() const
{
    if (!(target > 0.0 && target < 1.0)) {
        throw std::domain_error("olla target must lie in (0, 1)");
    }
    if (!(step_up_db > 0.0)) {
        throw std::domain_error("olla step_up_db must be positive");
    }
    if (!(min_db <= max_db)) {
        throw std::domain_error("olla offset bounds are inverted");
    }
    if (initial_db < min_db || initial_db > max_db) {
        throw std::domain_error("olla initial offset lies outside its bounds");
    }
}

Olla::Olla(OllaMode mode, OllaParams params) : mode_(mode), params_(params), offset_db_(params.initial_db)
{
    params_.validate();
}

void Olla::update(const CbgFeedback& feedback)
{
    if (feedback.ack.empty()) {
        return;
    }
    const double up = params_.step_up_db;
    const double down = params_.step_down_db();
    double delta = 0.0;
    if (mode_ == OllaMode::TbOlla) {
        delta = feedback.all_acked() ? -down : up;
    } else {
        const auto m = static_cast<double>(feedback.ack.size());
        const auto nacks = static_cast<double>(feedback.nack_count());
        delta = (nacks * up - (m - nacks) * down) / m;
    }
    offset_db_ = std::clamp(offset_db_ + delta, params_.min_db, params_.max_db);
}

}  // namespace xrla::sim
