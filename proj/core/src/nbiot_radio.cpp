#include <cmath>

#include "shmtwin/error.hpp"
#include "shmtwin/nbiot.hpp"
#include "shmtwin/series.hpp"

namespace shmtwin::nbiot {

const char* to_string(RadioState s) noexcept {
  switch (s) {
    case RadioState::OFF: return "OFF";
    case RadioState::ATTACHING: return "ATTACHING";
    case RadioState::CONNECTED_TX: return "CONNECTED_TX";
    case RadioState::CONNECTED_EDRX: return "CONNECTED_EDRX";
    case RadioState::IDLE_EDRX: return "IDLE_EDRX";
    case RadioState::PSM: return "PSM";
  }
  return "?";
}

const char* to_string(RadioEvent e) noexcept {
  switch (e) {
    case RadioEvent::power_on: return "power_on";
    case RadioEvent::attach_done: return "attach_done";
    case RadioEvent::tx_request: return "tx_request";
    case RadioEvent::tx_done: return "tx_done";
    case RadioEvent::inactivity: return "inactivity";
    case RadioEvent::t3324_expiry: return "t3324_expiry";
    case RadioEvent::t3412_expiry: return "t3412_expiry";
    case RadioEvent::paging: return "paging";
    case RadioEvent::downlink: return "downlink";
    case RadioEvent::wake: return "wake";
  }
  return "?";
}

std::optional<RadioState> next_state(RadioState state, RadioEvent event) noexcept {
  using S = RadioState;
  using E = RadioEvent;
  switch (state) {
    case S::OFF:
      if (event == E::power_on) return S::ATTACHING;
      break;
    case S::ATTACHING:
      if (event == E::attach_done) return S::CONNECTED_TX;
      break;
    case S::CONNECTED_TX:
      if (event == E::tx_done) return S::CONNECTED_EDRX;
      break;
    case S::CONNECTED_EDRX:
      if (event == E::tx_request || event == E::downlink) return S::CONNECTED_TX;
      if (event == E::inactivity) return S::IDLE_EDRX;
      break;
    case S::IDLE_EDRX:
      if (event == E::t3324_expiry) return S::PSM;
      if (event == E::paging || event == E::tx_request) return S::CONNECTED_TX;
      break;
    case S::PSM:
      if (event == E::wake) return S::CONNECTED_TX;
      if (event == E::t3412_expiry) return S::ATTACHING;
      break;
  }
  return std::nullopt;
}

RadioState step(RadioState state, RadioEvent event) {
  return next_state(state, event).value_or(state);
}

RadioState RadioStateMachine::step(RadioEvent event) {
  if (auto next = next_state(state_, event)) {
    state_ = *next;
  } else {
    audit_.push_back({seen_, state_, event});
  }
  ++seen_;
  return state_;
}

void TimerConfig::validate() const {
  if (!(t3324_s >= 0.0)) throw InvalidArgument("T3324 must be >= 0");
  if (!(t3412_s > 0.0 && t3412_s <= kMaxT3412))
    throw InvalidArgument("T3412 must lie in (0, 413 days]");
  if (t3324_s > t3412_s) throw InvalidArgument("T3324 must not exceed T3412");
  for (double c : {cedrx_cycle_s, iedrx_cycle_s})
    if (!(c >= kMinEdrx && c <= kMaxEdrx))
      throw InvalidArgument("eDRX cycle " + format_double(c) + " s outside [0.256, 9.216] s");
}

const char* to_string(CoverageClass c) noexcept {
  switch (c) {
    case CoverageClass::GOOD: return "GOOD";
    case CoverageClass::MEDIUM: return "MEDIUM";
    case CoverageClass::BAD: return "BAD";
  }
  return "?";
}

CoverageClass parse_coverage(const std::string& name) {
  if (name == "GOOD" || name == "good") return CoverageClass::GOOD;
  if (name == "MEDIUM" || name == "medium") return CoverageClass::MEDIUM;
  if (name == "BAD" || name == "bad") return CoverageClass::BAD;
  throw InvalidArgument("unknown coverage class: " + name);
}

CoverageClass classify_coverage(double rssi_dbm) {
  if (!std::isfinite(rssi_dbm)) throw InvalidArgument("RSSI must be finite");
  if (rssi_dbm > kGoodAboveDbm) return CoverageClass::GOOD;
  if (rssi_dbm > kBadAtOrBelowDbm) return CoverageClass::MEDIUM;
  return CoverageClass::BAD;
}

}  // namespace shmtwin::nbiot
