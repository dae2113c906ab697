#pragma once

#include "risd2d/bcd_driver.hpp"

#include <nlohmann/json.hpp>

// JSON encodings. Complex numbers are [re, im] pairs; complex matrices are
// {"rows", "cols", "data"} with data in row-major order.
namespace risd2d {

using json = nlohmann::json;

json complex_to_json(Complex c);
Complex complex_from_json(const json &j);
json cvector_to_json(const CVector &v);
CVector cvector_from_json(const json &j);
json cmatrix_to_json(const CMatrix &m);
CMatrix cmatrix_from_json(const json &j);
json rvector_to_json(const RVector &v);
RVector rvector_from_json(const json &j);

void to_json(json &j, const Point2 &p);
void from_json(const json &j, Point2 &p);
void to_json(json &j, const ScenarioConfig &c);
void from_json(const json &j, ScenarioConfig &c);
void to_json(json &j, const FadingConfig &c);
void from_json(const json &j, FadingConfig &c);
void to_json(json &j, const CsiErrorModel &c);
void from_json(const json &j, CsiErrorModel &c);
void to_json(json &j, const ChannelSet &c);
void from_json(const json &j, ChannelSet &c);
void to_json(json &j, const PhaseVector &p);
void from_json(const json &j, PhaseVector &p);
void to_json(json &j, const Pairing &p);
void from_json(const json &j, Pairing &p);
void to_json(json &j, const PowerAllocation &p);
void from_json(const json &j, PowerAllocation &p);
void to_json(json &j, const BeamformerSet &b);
void from_json(const json &j, BeamformerSet &b);
void to_json(json &j, const NoiseLevels &n);
void from_json(const json &j, NoiseLevels &n);
void to_json(json &j, const SinrReport &r);
void from_json(const json &j, SinrReport &r);
void to_json(json &j, const SolutionState &s);
void from_json(const json &j, SolutionState &s);
void to_json(json &j, const BcdTrace &t);
void from_json(const json &j, BcdTrace &t);
void to_json(json &j, const RgdConfig &c);
void from_json(const json &j, RgdConfig &c);
void to_json(json &j, const AdmmConfig &c);
void from_json(const json &j, AdmmConfig &c);
void to_json(json &j, const FpConfig &c);
void from_json(const json &j, FpConfig &c);
void to_json(json &j, const BcdConfig &c);
void from_json(const json &j, BcdConfig &c);

const char *to_string(PowerMode m);
PowerMode power_mode_from_string(const std::string &s);

} // namespace risd2d
