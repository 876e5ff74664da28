#include "dprisk/records.hpp"

#include "dprisk/errors.hpp"

namespace dprisk {

const char* to_string(Gender gender) { return gender == Gender::male ? "M" : "F"; }

const char* to_string(BenefitKind kind) {
    switch (kind) {
    case BenefitKind::dp_full:
        return "dp_full";
    case BenefitKind::dp_partial:
        return "dp_partial";
    case BenefitKind::rehab_benefit:
        return "rehab_benefit";
    case BenefitKind::rehab_allowance:
        return "rehab_allowance";
    case BenefitKind::oa:
        return "oa";
    }
    return "?";
}

Gender gender_from_code(const std::string& code) {
    if (code == "M") {
        return Gender::male;
    }
    if (code == "F") {
        return Gender::female;
    }
    throw SchemaError("invalid gender code '" + code + "' (expected M or F)");
}

BenefitKind benefit_kind_from_code(const std::string& code) {
    if (code == "dp_full") {
        return BenefitKind::dp_full;
    }
    if (code == "dp_partial") {
        return BenefitKind::dp_partial;
    }
    if (code == "rehab_benefit") {
        return BenefitKind::rehab_benefit;
    }
    if (code == "rehab_allowance") {
        return BenefitKind::rehab_allowance;
    }
    if (code == "oa") {
        return BenefitKind::oa;
    }
    throw SchemaError("invalid benefit_kind '" + code + "'");
}

} // namespace dprisk
