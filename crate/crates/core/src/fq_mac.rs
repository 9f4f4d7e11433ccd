//! Per-TID flow queueing at the MAC layer.
//!
//! A fixed global pool of flow queues is shared by every TID: a packet hashes
//! to a pool queue by flow key; if that queue is busy serving another TID the
//! packet is diverted to the enqueueing TID's dedicated overflow queue. Each
//! TID schedules the queues it owns with deficit round-robin across a new
//! list (freshly active queues, served first) and an old list, with CoDel
//! applied per queue at dequeue time. A global packet limit is enforced by
//! dropping from the head of the longest queue in the structure.

use std::collections::VecDeque;

use crate::codel::{codel_dequeue, CodelParams, CodelState};
use crate::packet::{Packet, TidId};
use crate::time::Nanos;

/// Pool-level configuration.
#[derive(Debug, Clone, Copy)]
pub struct FqMacConfig {
    /// Number of shared hash queues in the pool.
    pub num_flow_queues: usize,
    /// Global packet limit across all queues (hash + overflow).
    pub global_limit: usize,
    /// DRR quantum in bytes.
    pub quantum: u32,
    /// Seed for the flow-key hash, so queue placement is reproducible per run.
    pub hash_seed: u64,
}

impl Default for FqMacConfig {
    fn default() -> Self {
        FqMacConfig {
            num_flow_queues: 1024,
            global_limit: 8192,
            quantum: 300,
            hash_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ListMembership {
    None,
    New,
    Old,
}

/// Lifetime counters for one queue.
#[derive(Debug, Default, Clone, Copy)]
pub struct QueueStats {
    pub enqueued: u64,
    pub dequeued: u64,
    pub codel_drops: u64,
    pub overload_drops: u64,
}

/// One flow queue: packet FIFO, DRR deficit, CoDel state, list bookkeeping.
#[derive(Debug)]
pub struct FlowQueue {
    packets: VecDeque<Packet>,
    /// DRR deficit in bytes; service may push it below zero by one packet.
    deficit: i64,
    /// TID currently served by this queue. For pool queues this is cleared
    /// when the queue goes inactive; an overflow queue stays bound to its TID.
    owner_tid: Option<TidId>,
    codel: CodelState,
    membership: ListMembership,
    stats: QueueStats,
}

impl FlowQueue {
    fn new() -> Self {
        FlowQueue {
            packets: VecDeque::new(),
            deficit: 0,
            owner_tid: None,
            codel: CodelState::default(),
            membership: ListMembership::None,
            stats: QueueStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn deficit(&self) -> i64 {
        self.deficit
    }

    pub fn owner_tid(&self) -> Option<TidId> {
        self.owner_tid
    }

    pub fn stats(&self) -> &QueueStats {
        &self.stats
    }
}

/// Per-TID scheduling state over the shared pool.
#[derive(Debug, Default)]
struct TidState {
    new_queues: VecDeque<usize>,
    old_queues: VecDeque<usize>,
    /// Packets queued for this TID across all queues it owns.
    backlog: usize,
    /// Cross-TID hash collisions diverted to the overflow queue.
    collisions: u64,
}

/// Outcome of one enqueue.
#[derive(Debug, Default)]
pub struct EnqueueReport {
    /// Index of the queue the packet landed in.
    pub queue_idx: usize,
    /// True when a cross-TID collision (or a protective in-order diversion)
    /// sent the packet to the TID's overflow queue.
    pub diverted_to_overflow: bool,
    /// Head packet dropped from the globally longest queue because the pool
    /// was at its limit.
    pub dropped: Option<Packet>,
}

/// The shared queueing structure: pool queues first, then one overflow queue
/// per TID (index `num_flow_queues + tid`).
#[derive(Debug)]
pub struct FqMac {
    cfg: FqMacConfig,
    queues: Vec<FlowQueue>,
    tids: Vec<TidState>,
    global_count: usize,
}

/// Seeded splitmix64 finalizer — the flow-to-queue hash, also reusable as a
/// cheap deterministic stream-splitting function.
pub fn splitmix64(seed: u64, key: u64) -> u64 {
    let mut z = key ^ seed.rotate_left(32);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl FqMac {
    pub fn new(cfg: FqMacConfig, num_tids: usize) -> Self {
        assert!(cfg.num_flow_queues >= 1, "need at least one flow queue");
        assert!(cfg.global_limit >= 1, "global limit must admit a packet");
        assert!(cfg.quantum >= 1, "quantum must be positive");
        assert!(num_tids >= 1, "need at least one TID");
        let queues = (0..cfg.num_flow_queues + num_tids)
            .map(|_| FlowQueue::new())
            .collect();
        let tids = (0..num_tids).map(|_| TidState::default()).collect();
        FqMac {
            cfg,
            queues,
            tids,
            global_count: 0,
        }
    }

    pub fn config(&self) -> &FqMacConfig {
        &self.cfg
    }

    pub fn num_tids(&self) -> usize {
        self.tids.len()
    }

    /// Pool queue a flow key hashes to.
    pub fn hash_queue_index(&self, flow_key: u64) -> usize {
        (splitmix64(self.cfg.hash_seed, flow_key) % self.cfg.num_flow_queues as u64) as usize
    }

    /// Index of a TID's dedicated overflow queue.
    pub fn overflow_index(&self, tid: TidId) -> usize {
        self.cfg.num_flow_queues + tid as usize
    }

    pub fn queue(&self, idx: usize) -> &FlowQueue {
        &self.queues[idx]
    }

    pub fn global_packet_count(&self) -> usize {
        self.global_count
    }

    /// Packets queued for one TID across every queue it owns.
    pub fn tid_backlog(&self, tid: TidId) -> usize {
        self.tids[tid as usize].backlog
    }

    /// Total backlog across all TIDs (equals the global packet count).
    pub fn total_backlog(&self) -> usize {
        self.global_count
    }

    pub fn collisions(&self, tid: TidId) -> u64 {
        self.tids[tid as usize].collisions
    }

    /// Index of the longest queue in the whole structure (hash and overflow
    /// queues alike); ties break toward the lowest index. None if all empty.
    pub fn find_longest_queue(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (idx, q) in self.queues.iter().enumerate() {
            let len = q.len();
            if len == 0 {
                continue;
            }
            match best {
                Some((_, best_len)) if len <= best_len => {}
                _ => best = Some((idx, len)),
            }
        }
        best.map(|(idx, _)| idx)
    }

    /// Enqueue a packet for a TID. At the global limit, the head of the
    /// longest queue is dropped first. The packet lands in its hash queue
    /// unless that queue is serving another TID — or unless the TID's
    /// overflow queue is still backlogged, which would let a flow's packets
    /// straddle two queues and be reordered — in which case it is diverted
    /// to the overflow queue. A queue going active is listed in new_queues
    /// with a fresh quantum.
    pub fn enqueue(&mut self, mut pkt: Packet, tid: TidId, now: Nanos) -> EnqueueReport {
        let tid_idx = tid as usize;
        assert!(tid_idx < self.tids.len(), "unknown TID {tid}");
        let mut report = EnqueueReport::default();

        if self.global_count >= self.cfg.global_limit {
            let victim = self
                .find_longest_queue()
                .expect("pool at limit must hold a packet");
            let vq = &mut self.queues[victim];
            let dropped = vq.packets.pop_front().expect("longest queue is non-empty");
            vq.stats.overload_drops += 1;
            let owner = vq.owner_tid.expect("a backlogged queue has an owner");
            self.tids[owner as usize].backlog -= 1;
            self.global_count -= 1;
            report.dropped = Some(dropped);
        }

        let hash_idx = self.hash_queue_index(pkt.flow_key);
        let overflow_idx = self.overflow_index(tid);
        let q_idx = match self.queues[hash_idx].owner_tid {
            Some(owner) if owner != tid => {
                self.tids[tid_idx].collisions += 1;
                report.diverted_to_overflow = true;
                overflow_idx
            }
            None if !self.queues[overflow_idx].is_empty() => {
                report.diverted_to_overflow = true;
                overflow_idx
            }
            _ => hash_idx,
        };
        report.queue_idx = q_idx;

        pkt.enqueued = now;
        let q = &mut self.queues[q_idx];
        q.owner_tid = Some(tid);
        q.packets.push_back(pkt);
        q.stats.enqueued += 1;
        self.global_count += 1;
        self.tids[tid_idx].backlog += 1;
        if q.membership == ListMembership::None {
            q.membership = ListMembership::New;
            q.deficit = self.cfg.quantum as i64;
            self.tids[tid_idx].new_queues.push_back(q_idx);
        }
        report
    }

    /// Dequeue the next packet for a TID: new queues before old, deficit
    /// round-robin across them, CoDel applied per queue. CoDel casualties go
    /// into `dropped`. Returns None when the TID has nothing to send.
    pub fn dequeue(
        &mut self,
        tid: TidId,
        now: Nanos,
        params: &CodelParams,
        dropped: &mut Vec<Packet>,
    ) -> Option<Packet> {
        let tid_idx = tid as usize;
        loop {
            let (q_idx, from_new) = {
                let t = &self.tids[tid_idx];
                if let Some(&q) = t.new_queues.front() {
                    (q, true)
                } else if let Some(&q) = t.old_queues.front() {
                    (q, false)
                } else {
                    return None;
                }
            };

            if self.queues[q_idx].deficit <= 0 {
                self.queues[q_idx].deficit += self.cfg.quantum as i64;
                let t = &mut self.tids[tid_idx];
                if from_new {
                    t.new_queues.pop_front();
                } else {
                    t.old_queues.pop_front();
                }
                t.old_queues.push_back(q_idx);
                self.queues[q_idx].membership = ListMembership::Old;
                continue;
            }

            let before = dropped.len();
            let q = &mut self.queues[q_idx];
            let got = codel_dequeue(&mut q.packets, &mut q.codel, now, params, dropped);
            let codel_dropped = dropped.len() - before;
            q.stats.codel_drops += codel_dropped as u64;
            self.global_count -= codel_dropped;
            self.tids[tid_idx].backlog -= codel_dropped;

            match got {
                None => {
                    let t = &mut self.tids[tid_idx];
                    if from_new {
                        t.new_queues.pop_front();
                        t.old_queues.push_back(q_idx);
                        self.queues[q_idx].membership = ListMembership::Old;
                    } else {
                        t.old_queues.pop_front();
                        self.queues[q_idx].membership = ListMembership::None;
                        if q_idx < self.cfg.num_flow_queues {
                            self.queues[q_idx].owner_tid = None;
                        }
                    }
                    continue;
                }
                Some(pkt) => {
                    self.queues[q_idx].deficit -= pkt.len as i64;
                    self.queues[q_idx].stats.dequeued += 1;
                    self.global_count -= 1;
                    self.tids[tid_idx].backlog -= 1;
                    return Some(pkt);
                }
            }
        }
    }

    /// Every packet still queued, across all hash and overflow queues.
    pub fn iter_packets(&self) -> impl Iterator<Item = &Packet> {
        self.queues.iter().flat_map(|q| q.packets.iter())
    }

    /// Recount packets queue by queue (test/assertion support).
    pub fn recount_packets(&self) -> usize {
        self.queues.iter().map(|q| q.len()).sum()
    }
}
