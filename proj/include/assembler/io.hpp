#pragma once

#include <string>

#include "assembler/scenarios.hpp"

namespace assembler {

// Config file: default_setup() with any present sections replaced. Scenario
// entries whose name matches a built-in scenario override its fields; other
// names are appended. Throws ParseError / IoError.
Setup setup_from_json(const std::string& text);
Setup load_setup(const std::string& path);
std::string setup_to_json(const Setup& setup);

// {"plates": [{"translation": [...], "rotation_axis_angle": [...]}, ...]}
std::string pose_to_json(const StackPose& pose);
StackPose pose_from_json(const std::string& text);

std::string report_to_json(const ScenarioReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace assembler
