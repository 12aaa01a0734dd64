#pragma once

#include <string>
#include <vector>

#include "pathlens/types.hpp"

namespace pathlens {

enum class ConditionOp { Equals, OneOf, Exists, Gt, Ge, Lt, Le };

std::string to_string(ConditionOp op);
ConditionOp condition_op_from_string(const std::string& s);

struct Condition {
    std::string property;
    ConditionOp op = ConditionOp::Exists;
    PropertyValue operand;                 // equals / numeric compares
    std::vector<PropertyValue> operands;   // one_of
};

// Conjunction of conditions over actor properties. An empty condition list
// matches every actor.
struct SegmentDefinition {
    std::string segment_id;
    std::vector<Condition> conditions;
};

// Missing keys fail equals/one_of/compares and satisfy nothing but the
// negation of exists. A numeric compare meeting a non-numeric value throws
// type_mismatch: that is a data-quality signal, not a false.
bool evaluate_condition(const Condition& c, const PropertyMap& props);
bool evaluate_segment(const SegmentDefinition& seg, const PropertyMap& props);

Json segment_to_json(const SegmentDefinition& seg);
SegmentDefinition segment_from_json(const Json& j);

}  // namespace pathlens
