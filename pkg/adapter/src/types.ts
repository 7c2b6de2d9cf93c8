export interface DatasetInstance {
  instance_id: string;
  language: string;
  task: string;
  direction: string;
  system_id: string;
  source_text: string;
  generated_text: string;
  reference_text?: string;
  target_style_label: number;
}

export type Slot = "source" | "generated" | "reference";

export const PLAIN_SLOTS: Slot[] = ["source", "generated", "reference"];

/** Sentence text for one slot, or null when the slot is absent. */
export function slotText(inst: DatasetInstance, slot: Slot): string | null {
  if (slot === "source") return inst.source_text;
  if (slot === "generated") return inst.generated_text;
  return inst.reference_text ?? null;
}
