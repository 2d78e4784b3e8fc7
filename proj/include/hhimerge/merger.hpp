#pragma once

#include "hhimerge/demand.hpp"

namespace hhimerge {

// Two firms combining without merger-specific synergies.
struct MergerSpec {
    FirmId firm_a;
    FirmId firm_b;

    void validate() const;

    // Id given to the combined firm.
    FirmId merged_id() const { return firm_a + "+" + firm_b; }
};

}  // namespace hhimerge
