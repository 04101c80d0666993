#pragma once

#include <string>

#include "ragaudit/judge.hpp"

namespace ragaudit {

// Version id of the embedded prompt templates; echoed in run summaries.
inline constexpr const char* kPromptTemplateVersion = "ragaudit-prompts-v1";

struct PromptMessages {
    std::string system;
    std::string user;
};

// Renders the role-specific messages for a validated request. GLOBAL
// requests carrying a focus hint get the adaptive wording (re-examine the
// full context, treat the excerpt as a pointer, revise in any direction).
PromptMessages render_prompt(const JudgeRequest& request);

}  // namespace ragaudit
