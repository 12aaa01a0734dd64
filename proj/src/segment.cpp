#include "pathlens/segment.hpp"

#include <optional>

#include "pathlens/error.hpp"

namespace pathlens {

std::string to_string(ConditionOp op) {
    switch (op) {
        case ConditionOp::Equals: return "equals";
        case ConditionOp::OneOf: return "one_of";
        case ConditionOp::Exists: return "exists";
        case ConditionOp::Gt: return "gt";
        case ConditionOp::Ge: return "ge";
        case ConditionOp::Lt: return "lt";
        case ConditionOp::Le: return "le";
    }
    fail("invalid_condition", "unknown op enum value");
}

ConditionOp condition_op_from_string(const std::string& s) {
    for (ConditionOp op : {ConditionOp::Equals, ConditionOp::OneOf, ConditionOp::Exists,
                           ConditionOp::Gt, ConditionOp::Ge, ConditionOp::Lt, ConditionOp::Le})
        if (to_string(op) == s) return op;
    fail("invalid_condition", "'" + s + "' is not a condition operator");
}

namespace {

std::optional<double> as_number(const PropertyValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

bool values_equal(const PropertyValue& a, const PropertyValue& b) {
    const auto na = as_number(a);
    const auto nb = as_number(b);
    if (na && nb) return *na == *nb;
    return a == b;
}

}  // namespace

bool evaluate_condition(const Condition& c, const PropertyMap& props) {
    const auto it = props.find(c.property);
    if (c.op == ConditionOp::Exists) return it != props.end();
    if (it == props.end()) return false;
    const PropertyValue& v = it->second;

    switch (c.op) {
        case ConditionOp::Equals:
            return values_equal(v, c.operand);
        case ConditionOp::OneOf: {
            for (const auto& cand : c.operands)
                if (values_equal(v, cand)) return true;
            return false;
        }
        case ConditionOp::Gt:
        case ConditionOp::Ge:
        case ConditionOp::Lt:
        case ConditionOp::Le: {
            const auto lhs = as_number(v);
            const auto rhs = as_number(c.operand);
            if (!rhs)
                fail("invalid_condition",
                     "numeric compare on '" + c.property + "' needs a numeric operand");
            if (!lhs)
                fail("type_mismatch", "property '" + c.property + "' has non-numeric value '" +
                                          property_to_display(v) + "'");
            switch (c.op) {
                case ConditionOp::Gt: return *lhs > *rhs;
                case ConditionOp::Ge: return *lhs >= *rhs;
                case ConditionOp::Lt: return *lhs < *rhs;
                default: return *lhs <= *rhs;
            }
        }
        default:
            return false;
    }
}

bool evaluate_segment(const SegmentDefinition& seg, const PropertyMap& props) {
    for (const auto& c : seg.conditions)
        if (!evaluate_condition(c, props)) return false;
    return true;
}

Json segment_to_json(const SegmentDefinition& seg) {
    Json conds = Json::array();
    for (const auto& c : seg.conditions) {
        Json jc;
        jc["property"] = c.property;
        jc["op"] = to_string(c.op);
        if (c.op == ConditionOp::OneOf) {
            Json vals = Json::array();
            for (const auto& v : c.operands) vals.push_back(to_json(v));
            jc["values"] = vals;
        } else if (c.op != ConditionOp::Exists) {
            jc["value"] = to_json(c.operand);
        }
        conds.push_back(jc);
    }
    return Json{{"segment_id", seg.segment_id}, {"conditions", conds}};
}

SegmentDefinition segment_from_json(const Json& j) {
    SegmentDefinition seg;
    seg.segment_id = j.at("segment_id").get<std::string>();
    for (const auto& jc : j.at("conditions")) {
        Condition c;
        c.property = jc.at("property").get<std::string>();
        c.op = condition_op_from_string(jc.at("op").get<std::string>());
        if (c.op == ConditionOp::OneOf) {
            for (const auto& v : jc.at("values")) c.operands.push_back(property_value_from_json(v));
        } else if (c.op != ConditionOp::Exists) {
            c.operand = property_value_from_json(jc.at("value"));
        }
        seg.conditions.push_back(std::move(c));
    }
    return seg;
}

}  // namespace pathlens
