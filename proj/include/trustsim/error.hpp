#pragma once

#include <stdexcept>
#include <string>

namespace trustsim {

// Base for every error the harness raises on purpose. Callers that only care
// about "something in trustsim failed" can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    /// Type name recorded with failed trials.
    virtual const char *kind() const noexcept { return "Error"; }
};

#define TRUSTSIM_DEFINE_ERROR(Name)                                       \
    class Name : public Error {                                           \
    public:                                                               \
        using Error::Error;                                               \
        const char *kind() const noexcept override { return #Name; }      \
    }

// game_engine
TRUSTSIM_DEFINE_ERROR(OutOfRange);
TRUSTSIM_DEFINE_ERROR(GameOver);
TRUSTSIM_DEFINE_ERROR(Degenerate);
TRUSTSIM_DEFINE_ERROR(InvalidGameSpec);

// persona_registry
TRUSTSIM_DEFINE_ERROR(ParseError);
TRUSTSIM_DEFINE_ERROR(ValidationError);

// prompt_forge
TRUSTSIM_DEFINE_ERROR(UnsupportedRole);
TRUSTSIM_DEFINE_ERROR(MissingContext);
TRUSTSIM_DEFINE_ERROR(ConflictingMutation);
TRUSTSIM_DEFINE_ERROR(UnsupportedMutation);

// agent_runtime
TRUSTSIM_DEFINE_ERROR(InvalidAgent);
TRUSTSIM_DEFINE_ERROR(MissingCannedResponse);
TRUSTSIM_DEFINE_ERROR(TransportError);
TRUSTSIM_DEFINE_ERROR(AuthError);
TRUSTSIM_DEFINE_ERROR(MalformedResponse);

// analysis
TRUSTSIM_DEFINE_ERROR(EmptyInput);
TRUSTSIM_DEFINE_ERROR(NoValidRecords);
TRUSTSIM_DEFINE_ERROR(AllAmbiguous);
TRUSTSIM_DEFINE_ERROR(TooShort);
TRUSTSIM_DEFINE_ERROR(DegenerateSample);

// experiment_cli
TRUSTSIM_DEFINE_ERROR(ConfigError);
TRUSTSIM_DEFINE_ERROR(ReplayMismatch);

#undef TRUSTSIM_DEFINE_ERROR

}  // namespace trustsim
