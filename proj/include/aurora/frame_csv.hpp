#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "aurora/formants.hpp"

namespace aurora {

/// `t_ms,rms_db,voiced,f1,b1,f2,b2,f3,b3,f4,b4`; missing formants are empty
/// cells. The spectral envelope is not part of this format.
void write_frame_csv(std::ostream& out, std::span<const FormantFrame> frames);

/// Inverse of write_frame_csv; envelope_db of every frame is left empty.
std::vector<FormantFrame> read_frame_csv(std::istream& in);

}  // namespace aurora
