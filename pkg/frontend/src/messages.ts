// Human-readable messages for the API's stable error codes.

const MESSAGES: Record<string, string> = {
  ALREADY_SEALED: "Your estimate is sealed and cannot be changed.",
  VALUE_NOT_ON_SCALE: "Pick one of the scale values.",
  STORY_NOT_ESTIMATING: "This story is not open for estimation right now.",
  NOT_ALL_SUBMITTED: "Waiting for everyone to submit. A facilitator can reveal anyway.",
  STORY_NOT_REVEALED: "Estimates must be revealed before committing.",
  STORY_NOT_IN_PROGRESS: "Revisions and actuals are only possible while the story is in progress.",
  NO_ORIGINAL_ESTIMATE: "You never submitted an estimate for this story.",
  NON_POSITIVE_ACTUAL: "Actual effort must be a positive number.",
  STORY_NOT_DONE: "Record the actual effort before scoring.",
  ALREADY_SCORED: "This story has already been scored.",
  UNKNOWN_PARTICIPANT: "Your session token is not valid here. Re-join the room.",
  DUPLICATE_PARTICIPANT: "That name is already taken in this room.",
  UNKNOWN_SESSION: "No such session. Check the room id.",
  UNKNOWN_STORY: "That story no longer exists.",
  EMPTY_ESTIMATE_SET: "No estimates were submitted, so nothing can be committed.",
  INVALID_CONFIG: "The session configuration is invalid.",
  INVALID_INPUT: "That input is empty or malformed.",
};

export function describeError(code: string, fallback = "Something went wrong."): string {
  return MESSAGES[code] ?? fallback;
}
