//! Lossy broadcast bus.
//!
//! Models the asynchronous inter-drone channel: a message broadcast at tick
//! `t` reaches the other drones at tick `t + 1`, and each (message,
//! recipient) pair is dropped independently. Per-recipient delivery order is
//! sender-id order, so runs replay deterministically.

use rand::Rng;

use crate::types::BusMessage;

#[derive(Debug, Clone)]
pub struct Bus {
    n_drones: usize,
    drop_prob: f64,
    /// Everything broadcast since the previous delivery.
    in_flight: Vec<BusMessage>,
}

impl Bus {
    pub fn new(n_drones: usize, drop_prob: f64) -> Self {
        Bus { n_drones, drop_prob, in_flight: Vec::new() }
    }

    pub fn broadcast(&mut self, message: BusMessage) {
        self.in_flight.push(message);
    }

    /// Delivers everything broadcast since the previous call. The simulation
    /// loop calls this once at the start of each tick, before any new
    /// broadcasts, which realizes exactly one tick of latency. Returns one
    /// inbox per drone; senders never receive their own messages.
    pub fn deliver(&mut self, rng: &mut impl Rng) -> Vec<Vec<BusMessage>> {
        let mut inboxes = vec![Vec::new(); self.n_drones];
        let mut in_flight = std::mem::take(&mut self.in_flight);
        in_flight.sort_by_key(|m| m.sender);
        for message in in_flight {
            for recipient in 0..self.n_drones {
                if recipient == message.sender.index() {
                    continue;
                }
                if self.drop_prob > 0.0 && rng.random_bool(self.drop_prob) {
                    continue;
                }
                inboxes[recipient].push(message);
            }
        }
        inboxes
    }
}
